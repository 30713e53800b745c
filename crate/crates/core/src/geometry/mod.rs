//! Bodies, affine poses and the sampled geometry built on them.
//!
//! A [`Shape`] is a small serializable descriptor. [`Shape::prepare`] turns
//! it into a [`Body`], which owns the derived data (vertex lists, spatial
//! indices) and answers membership, volume and boundary-distance queries in
//! the shape's local frame. Koch data is cached per level.

mod estimate;
mod io;
pub mod koch;
mod polygon;
mod polyline;
mod rects;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};

pub use estimate::{
    fit_beta, minkowski_shell_volume, symmetric_difference_volume, BetaFit, McValue,
};
pub use io::{read_vertices_csv, write_vertices_csv};
pub use koch::{koch_polygon, SnowflakeDecomposition, MAX_KOCH_LEVEL};
pub use polygon::{
    circle_segment_area, disk_polygon_area, halfplane_polygon_area, lens_area, polygon_area,
    IndexedPolygon,
};
pub(crate) use polygon::{clip_convex, polygon_centroid};
pub use polyline::Polyline;
pub use rects::RectUnion;

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;

/// Ambient dimension; only the plane and space are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    #[default]
    Two,
    Three,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Volume of the unit ball.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Dim::Two => PI,
            Dim::Three => 4.0 * PI / 3.0,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = LabError;
    fn try_from(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(LabError::UnsupportedDimension(d)),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.get()
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// Element of SO(2) or SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rotation {
    /// Counterclockwise angle in `[0, 2π)`.
    Planar { angle: f64 },
    /// Unit quaternion `[w, x, y, z]`.
    Spatial { quaternion: [f64; 4] },
}

impl Rotation {
    pub fn planar(angle: f64) -> Self {
        Rotation::Planar { angle: angle.rem_euclid(2.0 * PI) }
    }

    pub fn spatial(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(LabError::InvalidPose("quaternion must be finite and nonzero".into()));
        }
        Ok(Rotation::Spatial { quaternion: q.map(|v| v / n) })
    }

    pub fn identity(dim: Dim) -> Self {
        match dim {
            Dim::Two => Rotation::Planar { angle: 0.0 },
            Dim::Three => Rotation::Spatial { quaternion: [1.0, 0.0, 0.0, 0.0] },
        }
    }

    /// Haar-uniform rotation from uniforms in `[0,1)`: one for SO(2),
    /// three for SO(3) (Shoemake's construction).
    pub fn uniform(dim: Dim, u: &[f64]) -> Self {
        match dim {
            Dim::Two => Rotation::planar(2.0 * PI * u[0]),
            Dim::Three => {
                let (a, b) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
                let (t1, t2) = (2.0 * PI * u[1], 2.0 * PI * u[2]);
                Rotation::Spatial { quaternion: [b * t2.cos(), a * t1.sin(), a * t1.cos(), b * t2.sin()] }
            }
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Rotation::Planar { .. } => Dim::Two,
            Rotation::Spatial { .. } => Dim::Three,
        }
    }

    fn unit_quaternion(q: &[f64; 4]) -> UnitQuaternion<f64> {
        UnitQuaternion::new_normalize(Quaternion::new(q[0], q[1], q[2], q[3]))
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        match self {
            Rotation::Planar { angle } => {
                let (s, c) = angle.sin_cos();
                Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
            }
            Rotation::Spatial { quaternion } => {
                Self::unit_quaternion(quaternion).to_rotation_matrix().into_inner()
            }
        }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        match self {
            Rotation::Planar { angle } => {
                let (s, c) = angle.sin_cos();
                Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
            }
            Rotation::Spatial { quaternion } => Self::unit_quaternion(quaternion) * v,
        }
    }

    pub fn apply_inverse(&self, v: &Vec3) -> Vec3 {
        match self {
            Rotation::Planar { angle } => {
                let (s, c) = angle.sin_cos();
                Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
            }
            Rotation::Spatial { quaternion } => Self::unit_quaternion(quaternion).inverse() * v,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Rotation) -> Result<Rotation> {
        match (self, other) {
            (Rotation::Planar { angle: a }, Rotation::Planar { angle: b }) => {
                Ok(Rotation::planar(a + b))
            }
            (Rotation::Spatial { quaternion: a }, Rotation::Spatial { quaternion: b }) => {
                let q = Self::unit_quaternion(a) * Self::unit_quaternion(b);
                Ok(Rotation::Spatial { quaternion: [q.w, q.i, q.j, q.k] })
            }
            _ => Err(LabError::InvalidPose("cannot compose rotations of different dimension".into())),
        }
    }
}

/// A member `x + τσΩ` of an affine family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePose {
    pub translation: Vec3,
    pub dilation: f64,
    pub rotation: Rotation,
}

impl AffinePose {
    pub fn new(translation: Vec3, dilation: f64, rotation: Rotation) -> Result<Self> {
        let pose = AffinePose { translation, dilation, rotation };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity(dim: Dim) -> Self {
        AffinePose { translation: Vec3::zeros(), dilation: 1.0, rotation: Rotation::identity(dim) }
    }

    pub fn planar(x: f64, y: f64, dilation: f64, angle: f64) -> Self {
        AffinePose { translation: Vec3::new(x, y, 0.0), dilation, rotation: Rotation::planar(angle) }
    }

    pub fn shifted(dim: Dim, translation: Vec3) -> Self {
        AffinePose { translation, ..Self::identity(dim) }
    }

    pub fn dim(&self) -> Dim {
        self.rotation.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dilation.is_finite() && self.dilation > 0.0) {
            return Err(LabError::InvalidPose(format!("dilation {} must be positive", self.dilation)));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(LabError::InvalidPose("translation must be finite".into()));
        }
        match self.rotation {
            Rotation::Planar { angle } if !angle.is_finite() => {
                Err(LabError::InvalidPose("angle must be finite".into()))
            }
            Rotation::Planar { .. } if self.translation.z != 0.0 => {
                Err(LabError::InvalidPose("planar pose with nonzero z translation".into()))
            }
            Rotation::Spatial { quaternion } => {
                let n = quaternion.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    Err(LabError::InvalidPose(format!("quaternion norm {n} is not 1")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `σ⁻¹((p − x)/τ)`.
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply_inverse(&(p - self.translation)) / self.dilation
    }

    /// `x + τσq`.
    pub fn to_world(&self, q: &Vec3) -> Vec3 {
        self.translation + self.rotation.apply(q) * self.dilation
    }

    /// The pose after applying the rigid motion `p ↦ g·p + shift` to space.
    pub fn moved_by(&self, g: &Rotation, shift: &Vec3) -> Result<Self> {
        Ok(AffinePose {
            translation: g.apply(&self.translation) + shift,
            dilation: self.dilation,
            rotation: g.compose(&self.rotation)?,
        })
    }
}

fn default_beta_truncation() -> Option<u64> {
    None
}

/// Serializable description of a body `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum Shape {
    Ball {
        radius: f64,
        #[serde(default)]
        dim: Dim,
    },
    /// Counterclockwise vertex list.
    ConvexPolygon { vertices: Vec<[f64; 2]> },
    /// The level-`n` snowflake polygon `K_n`, centroid at the origin.
    KochRegion { level: u32 },
    /// The level-`n` Koch curve `C_n` (a closed polyline of zero area).
    KochCurvePolyline { level: u32 },
    /// Union of the rectangles `[n^{-γ} − z_n/3, n^{-γ}] × [0,1]`, `γ = β/(1−β)`.
    RectangleUnionGamma {
        beta: f64,
        #[serde(default = "default_beta_truncation", skip_serializing_if = "Option::is_none")]
        truncation: Option<u64>,
    },
    /// Closed half-space `{x · θ ≥ ρ}`.
    HalfSpace { theta: Vec<f64>, rho: f64 },
}

impl Shape {
    pub fn ball(radius: f64) -> Self {
        Shape::Ball { radius, dim: Dim::Two }
    }

    /// Axis-parallel unit square centered at the origin.
    pub fn unit_square() -> Self {
        Shape::ConvexPolygon {
            vertices: vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]],
        }
    }

    pub fn half_plane(angle: f64, rho: f64) -> Self {
        Shape::HalfSpace { theta: vec![angle.cos(), angle.sin()], rho }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Ball { .. } => "Ball",
            Shape::ConvexPolygon { .. } => "ConvexPolygon",
            Shape::KochRegion { .. } => "KochRegion",
            Shape::KochCurvePolyline { .. } => "KochCurvePolyline",
            Shape::RectangleUnionGamma { .. } => "RectangleUnionGamma",
            Shape::HalfSpace { .. } => "HalfSpace",
        }
    }

    pub fn dim(&self) -> Result<Dim> {
        match self {
            Shape::Ball { dim, .. } => Ok(*dim),
            Shape::HalfSpace { theta, .. } => Dim::try_from(theta.len()),
            _ => Ok(Dim::Two),
        }
    }

    /// Symmetric-difference exponent `β` of the body, where known in closed form.
    pub fn beta(&self) -> Option<f64> {
        match self {
            Shape::Ball { .. } | Shape::ConvexPolygon { .. } | Shape::HalfSpace { .. } => Some(1.0),
            Shape::KochRegion { .. } => Some(2.0 - 4f64.ln() / 3f64.ln()),
            Shape::RectangleUnionGamma { beta, .. } => Some(*beta),
            Shape::KochCurvePolyline { .. } => None,
        }
    }

    pub fn prepare(&self) -> Result<Body> {
        let geom = match self {
            Shape::Ball { radius, dim } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(LabError::InvalidShape(format!("ball radius {radius} must be positive")));
                }
                Geom::Ball { radius: *radius, dim: *dim }
            }
            Shape::ConvexPolygon { vertices } => {
                let v: Vec<Vec2> = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                polygon::check_convex_ccw(&v)?;
                Geom::Polygon(Arc::new(IndexedPolygon::new(v)?))
            }
            Shape::KochRegion { level } => Geom::Polygon(koch::region(*level)?),
            Shape::KochCurvePolyline { level } => Geom::Curve(koch::curve(*level)?),
            Shape::RectangleUnionGamma { beta, truncation } => {
                Geom::Rects(Arc::new(RectUnion::new(*beta, *truncation)?))
            }
            Shape::HalfSpace { theta, rho } => {
                let dim = Dim::try_from(theta.len())?;
                let mut t = Vec3::zeros();
                for (i, v) in theta.iter().enumerate() {
                    t[i] = *v;
                }
                let n = t.norm();
                if !(n.is_finite() && (n - 1.0).abs() < 1e-9) || !rho.is_finite() {
                    return Err(LabError::InvalidShape("half-space needs a unit normal and finite offset".into()));
                }
                Geom::HalfSpace { theta: t / n, rho: *rho, dim }
            }
        };
        Ok(Body { shape: self.clone(), geom })
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Geom {
    Ball { radius: f64, dim: Dim },
    Polygon(Arc<IndexedPolygon>),
    Curve(Arc<Polyline>),
    Rects(Arc<RectUnion>),
    HalfSpace { theta: Vec3, rho: f64, dim: Dim },
}

/// A prepared shape; immutable and cheap to clone.
#[derive(Clone, Debug)]
pub struct Body {
    shape: Shape,
    pub(crate) geom: Geom,
}

impl Body {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> Dim {
        match &self.geom {
            Geom::Ball { dim, .. } | Geom::HalfSpace { dim, .. } => *dim,
            _ => Dim::Two,
        }
    }

    /// Smallest `r` with `Ω ⊆ B(0, r)`; infinite for half-spaces.
    pub fn bounding_radius(&self) -> f64 {
        match &self.geom {
            Geom::Ball { radius, .. } => *radius,
            Geom::Polygon(p) => p.bounding_radius(),
            Geom::Curve(c) => c.bounding_radius(),
            Geom::Rects(r) => r.bounding_radius(),
            Geom::HalfSpace { .. } => f64::INFINITY,
        }
    }

    pub fn volume(&self) -> Result<f64> {
        match &self.geom {
            Geom::Ball { radius, dim } => Ok(dim.unit_ball_volume() * radius.powi(dim.get() as i32)),
            Geom::Polygon(p) => match self.shape {
                Shape::KochRegion { level } => Ok(koch::region_area(level)),
                _ => Ok(p.area()),
            },
            Geom::Curve(_) => Ok(0.0),
            Geom::Rects(r) => Ok(r.area()),
            Geom::HalfSpace { .. } => Err(LabError::UnboundedVolume),
        }
    }

    pub fn polygon(&self) -> Option<&IndexedPolygon> {
        match &self.geom {
            Geom::Polygon(p) => Some(p),
            _ => None,
        }
    }

    pub fn polyline(&self) -> Option<&Polyline> {
        match &self.geom {
            Geom::Curve(c) => Some(c),
            _ => None,
        }
    }

    pub fn rects(&self) -> Option<&RectUnion> {
        match &self.geom {
            Geom::Rects(r) => Some(r),
            _ => None,
        }
    }

    /// Membership of a point given in the body's own frame. Boundary points count as inside.
    pub fn contains_local(&self, q: &Vec3) -> bool {
        match &self.geom {
            Geom::Ball { radius, dim } => {
                let r2 = match dim {
                    Dim::Two => q.x * q.x + q.y * q.y,
                    Dim::Three => q.norm_squared(),
                };
                r2 <= radius * radius
            }
            Geom::Polygon(p) => p.contains(&q.xy()),
            Geom::Curve(c) => c.within(&q.xy(), 1e-12),
            Geom::Rects(r) => r.contains(&q.xy()),
            Geom::HalfSpace { theta, rho, .. } => q.dot(theta) >= *rho,
        }
    }

    pub fn contains(&self, pose: &AffinePose, p: &Vec3) -> bool {
        self.contains_local(&pose.to_local(p))
    }

    /// Whether `dist(q, ∂Ω) ≤ t` for a point in the body's frame.
    pub fn boundary_within(&self, q: &Vec3, t: f64) -> Result<bool> {
        match &self.geom {
            Geom::Ball { radius, dim } => {
                let r = match dim {
                    Dim::Two => q.xy().norm(),
                    Dim::Three => q.norm(),
                };
                Ok((r - radius).abs() <= t)
            }
            Geom::Polygon(p) => Ok(p.boundary_within(&q.xy(), t)),
            Geom::Curve(c) => Ok(c.within(&q.xy(), t)),
            Geom::Rects(r) => Ok(r.boundary_within(&q.xy(), t)),
            Geom::HalfSpace { .. } => Err(LabError::UnboundedVolume),
        }
    }

    /// Axis-aligned bounding box in the local frame (`z` ignored in the plane).
    pub fn bbox(&self) -> Result<(Vec3, Vec3)> {
        match &self.geom {
            Geom::Ball { radius, dim } => {
                let z = if *dim == Dim::Three { *radius } else { 0.0 };
                Ok((Vec3::new(-radius, -radius, -z), Vec3::new(*radius, *radius, z)))
            }
            Geom::Polygon(p) => {
                let (lo, hi) = p.bbox();
                Ok((Vec3::new(lo.x, lo.y, 0.0), Vec3::new(hi.x, hi.y, 0.0)))
            }
            Geom::Curve(c) => {
                let (lo, hi) = c.bbox();
                Ok((Vec3::new(lo.x, lo.y, 0.0), Vec3::new(hi.x, hi.y, 0.0)))
            }
            Geom::Rects(r) => {
                let (lo, hi) = r.bbox();
                Ok((Vec3::new(lo.x, lo.y, 0.0), Vec3::new(hi.x, hi.y, 0.0)))
            }
            Geom::HalfSpace { .. } => Err(LabError::UnboundedVolume),
        }
    }
}

fn check_point(p: &Vec3) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        invalid("query point must be finite")
    }
}

/// Whether `p ∈ x + τσΩ`.
pub fn contains(shape: &Shape, pose: &AffinePose, p: &Vec3) -> Result<bool> {
    let body = shape.prepare()?;
    check_point(p)?;
    pose.validate()?;
    if pose.dim() != body.dim() {
        return Err(LabError::InvalidPose(format!(
            "pose dimension {} does not match shape dimension {}",
            pose.dim(),
            body.dim()
        )));
    }
    Ok(body.contains(pose, p))
}

pub fn volume(shape: &Shape) -> Result<f64> {
    shape.prepare()?.volume()
}
