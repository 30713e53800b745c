//! Probability measures with a growth exponent `α`.
//!
//! [`MeasureSpec`] is the serializable description; [`MeasureSpec::prepare`]
//! yields a [`PreparedMeasure`] holding the derived geometry. Exact values
//! of `μ(x + τσΩ)` exist for the pairs listed on [`PreparedMeasure::exact`];
//! an [`Evaluator`] may fall back to an [`EmpiricalMeasure`] for the rest.

mod empirical;
mod fourier;
mod growth;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{
    circle_segment_area, disk_polygon_area, halfplane_polygon_area, koch, lens_area, AffinePose, Body, Dim,
    Geom, Polyline, Rotation, Shape, Vec2, Vec3,
};
use crate::pointset::{Generator, PointSet};

pub use empirical::EmpiricalMeasure;
pub use fourier::{fourier_by_triangles, fourier_coefficient, polygon_ft, FourierValue, DEFAULT_CUTOFF};
pub use growth::{verify_growth, GrowthOptions, GrowthReport};

/// Bi-Lipschitz maps available for push-forward measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    /// `x ↦ Ax + b`; `matrix` is given row by row.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// Planar `r e(θ) ↦ r (1 + a cos kθ) e(θ)`.
    RadialGraph { amplitude: f64, frequency: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum MeasureKind {
    /// Normalized Lebesgue measure on a bounded body.
    LebesgueOnShape { support: Shape },
    /// Arclength on the level-`n` Koch curve; each segment has mass `(3·4^n)^{-1}`.
    KochCurveMeasure { level: u32 },
    /// Normalized arclength on the circle of the given radius about the origin.
    CircleArcMeasure { radius: f64 },
    /// Normalized area on the sphere of the given radius about the origin in R³.
    SphereSurfaceMeasure { radius: f64 },
    /// Image of `base` under a bi-Lipschitz map with lower constant `lipschitz_lower`.
    Pushforward { base: Box<MeasureSpec>, map: MapDescriptor, lipschitz_lower: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub kind: MeasureKind,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_constant: Option<f64>,
}

pub fn koch_alpha() -> f64 {
    4f64.ln() / 3f64.ln()
}

impl MeasureSpec {
    pub fn lebesgue(support: Shape) -> Self {
        let alpha = support.dim().map(|d| d.get() as f64).unwrap_or(2.0);
        MeasureSpec { kind: MeasureKind::LebesgueOnShape { support }, alpha, growth_constant: None }
    }

    pub fn koch_curve(level: u32) -> Self {
        MeasureSpec { kind: MeasureKind::KochCurveMeasure { level }, alpha: koch_alpha(), growth_constant: None }
    }

    pub fn circle(radius: f64) -> Self {
        MeasureSpec { kind: MeasureKind::CircleArcMeasure { radius }, alpha: 1.0, growth_constant: None }
    }

    pub fn sphere(radius: f64) -> Self {
        MeasureSpec { kind: MeasureKind::SphereSurfaceMeasure { radius }, alpha: 2.0, growth_constant: None }
    }

    pub fn pushforward(base: MeasureSpec, map: MapDescriptor, lipschitz_lower: f64) -> Self {
        let alpha = base.alpha;
        MeasureSpec { kind: MeasureKind::Pushforward { base: Box::new(base), map, lipschitz_lower }, alpha, growth_constant: None }
    }

    /// Short identifier used in metadata and reports.
    pub fn id(&self) -> String {
        match &self.kind {
            MeasureKind::LebesgueOnShape { support } => format!("lebesgue-{}", shape_id(support)),
            MeasureKind::KochCurveMeasure { level } => format!("koch-curve-{level}"),
            MeasureKind::CircleArcMeasure { radius } => format!("circle-r{radius}"),
            MeasureKind::SphereSurfaceMeasure { radius } => format!("sphere-r{radius}"),
            MeasureKind::Pushforward { base, .. } => format!("pushforward-{}", base.id()),
        }
    }

    pub fn prepare(&self) -> Result<PreparedMeasure> {
        let (repr, dim, radius) = match &self.kind {
            MeasureKind::LebesgueOnShape { support } => {
                let body = support.prepare()?;
                if body.bounding_radius().is_infinite() {
                    return Err(LabError::UnboundedVolume);
                }
                let volume = match &body.geom {
                    Geom::Polygon(p) => p.area(),
                    _ => body.volume()?,
                };
                if volume <= 0.0 {
                    return Err(LabError::ZeroVolume);
                }
                let (dim, r) = (body.dim(), body.bounding_radius());
                (Repr::Lebesgue { body, volume }, dim, r)
            }
            MeasureKind::KochCurveMeasure { level } => {
                let c = koch::curve(*level)?;
                let r = c.bounding_radius();
                (Repr::Curve(c), Dim::Two, r)
            }
            MeasureKind::CircleArcMeasure { radius } => {
                positive(*radius, "circle radius")?;
                (Repr::Circle { radius: *radius }, Dim::Two, *radius)
            }
            MeasureKind::SphereSurfaceMeasure { radius } => {
                positive(*radius, "sphere radius")?;
                (Repr::Sphere { radius: *radius }, Dim::Three, *radius)
            }
            MeasureKind::Pushforward { base, map, lipschitz_lower } => {
                let base = base.prepare()?;
                let map = PreparedMap::new(map, base.dim, *lipschitz_lower)?;
                let r = map.image_radius(base.support_radius);
                let dim = base.dim;
                (Repr::Push { base: Box::new(base), map }, dim, r)
            }
        };
        let d = dim.get() as f64;
        if !(self.alpha > 0.0 && self.alpha <= d) {
            return invalid(format!("alpha {} must lie in (0, {d}]", self.alpha));
        }
        if let Some(c) = self.growth_constant {
            positive(c, "growth constant")?;
        }
        Ok(PreparedMeasure { spec: self.clone(), repr, dim, support_radius: radius })
    }
}

fn shape_id(s: &Shape) -> String {
    match s {
        Shape::Ball { radius, dim } => format!("ball{dim}-r{radius}"),
        Shape::ConvexPolygon { vertices } if vertices.len() == 4 => "quadrilateral".into(),
        Shape::ConvexPolygon { vertices } => format!("polygon{}", vertices.len()),
        Shape::KochRegion { level } => format!("koch-region-{level}"),
        Shape::KochCurvePolyline { level } => format!("koch-curve-{level}"),
        Shape::RectangleUnionGamma { beta, .. } => format!("rectangles-beta{beta}"),
        Shape::HalfSpace { .. } => "halfspace".into(),
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        invalid(format!("{what} {v} must be positive"))
    }
}

#[derive(Clone, Debug)]
enum PreparedMap {
    Affine { a: Matrix3<f64>, b: Vec3, similarity: Option<(f64, Rotation)>, norm: f64 },
    Radial { amp: f64, k: f64 },
}

impl PreparedMap {
    fn new(m: &MapDescriptor, dim: Dim, c1: f64) -> Result<Self> {
        positive(c1, "lower Lipschitz constant")?;
        match m {
            MapDescriptor::Affine { matrix, offset } => {
                let d = dim.get();
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) || offset.len() != d {
                    return Err(LabError::UnsupportedDimension(matrix.len()));
                }
                let mut a = Matrix3::identity();
                let mut b = Vec3::zeros();
                for i in 0..d {
                    b[i] = offset[i];
                    for j in 0..d {
                        a[(i, j)] = matrix[i][j];
                    }
                }
                if a.determinant() == 0.0 {
                    return invalid("affine map is singular");
                }
                let block = nalgebra::DMatrix::from_fn(d, d, |i, j| a[(i, j)]);
                let sv = block.clone().svd(false, false).singular_values;
                let (smin, smax) = (sv.min(), sv.max());
                if smin < c1 * (1.0 - 1e-9) {
                    return invalid(format!("map contracts by {smin}, below the stated constant {c1}"));
                }
                let ata = block.transpose() * &block;
                let s2 = ata[(0, 0)];
                let conformal = (ata - nalgebra::DMatrix::identity(d, d) * s2).abs().max() < 1e-12 * s2.max(1.0);
                let similarity = if conformal && a.determinant() > 0.0 && dim == Dim::Two {
                    let s = s2.sqrt();
                    Some((s, Rotation::planar(a[(1, 0)].atan2(a[(0, 0)]))))
                } else if conformal && a.determinant() > 0.0 {
                    let s = s2.sqrt();
                    let r = nalgebra::Rotation3::from_matrix_unchecked(a / s);
                    let q = nalgebra::UnitQuaternion::from_rotation_matrix(&r);
                    Some((s, Rotation::spatial([q.w, q.i, q.j, q.k])?))
                } else {
                    None
                };
                Ok(PreparedMap::Affine { a, b, similarity, norm: smax })
            }
            MapDescriptor::RadialGraph { amplitude, frequency } => {
                if dim != Dim::Two {
                    return Err(LabError::UnsupportedDimension(dim.get()));
                }
                let k = *frequency as f64;
                if !(amplitude.abs() * (1.0 + k) < 1.0) {
                    return invalid("radial graph needs |a|(1 + k) < 1 to be bi-Lipschitz");
                }
                Ok(PreparedMap::Radial { amp: *amplitude, k })
            }
        }
    }

    fn apply(&self, p: &Vec3) -> Vec3 {
        match self {
            PreparedMap::Affine { a, b, .. } => a * p + b,
            PreparedMap::Radial { amp, k } => {
                let th = p.y.atan2(p.x);
                p * (1.0 + amp * (k * th).cos())
            }
        }
    }

    fn image_radius(&self, r: f64) -> f64 {
        match self {
            PreparedMap::Affine { b, norm, .. } => norm * r + b.norm(),
            PreparedMap::Radial { amp, .. } => r * (1.0 + amp.abs()),
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Lebesgue { body: Body, volume: f64 },
    Curve(Arc<Polyline>),
    Circle { radius: f64 },
    Sphere { radius: f64 },
    Push { base: Box<PreparedMeasure>, map: PreparedMap },
}

/// A measure with its derived geometry; immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct PreparedMeasure {
    spec: MeasureSpec,
    repr: Repr,
    dim: Dim,
    support_radius: f64,
}

/// A measure value together with an error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error: f64,
    pub exact: bool,
}

// World half-space `{p · n ≥ off}` of a posed half-space body.
fn world_halfspace(body: &Body, pose: &AffinePose) -> Option<(Vec3, f64)> {
    match &body.geom {
        Geom::HalfSpace { theta, rho, .. } => {
            let n = pose.rotation.apply(theta);
            Some((n, rho * pose.dilation + pose.translation.dot(&n)))
        }
        _ => None,
    }
}

impl PreparedMeasure {
    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    /// `r₀` with `supp μ ⊆ B(0, r₀)`.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Support diameter bound used for growth checks.
    pub fn diameter(&self) -> f64 {
        2.0 * self.support_radius
    }

    pub fn support_body(&self) -> Option<&Body> {
        match &self.repr {
            Repr::Lebesgue { body, .. } => Some(body),
            _ => None,
        }
    }

    pub fn curve(&self) -> Option<&Polyline> {
        match &self.repr {
            Repr::Curve(c) => Some(c),
            _ => None,
        }
    }

    fn check_dims(&self, body: &Body, pose: &AffinePose) -> Result<()> {
        if body.dim() != self.dim || pose.dim() != self.dim {
            return Err(LabError::InvalidPose(format!(
                "measure in dimension {} evaluated on a body in dimension {} with a pose in dimension {}",
                self.dim,
                body.dim(),
                pose.dim()
            )));
        }
        Ok(())
    }

    /// Exact `μ(x + τσΩ)` where a closed form or exact clipping exists:
    /// Lebesgue on polygons and disks against balls, half-spaces and polygons;
    /// Lebesgue on 3-balls against balls and half-spaces; Lebesgue on the
    /// rectangle union against balls and half-spaces; the Koch curve against
    /// balls, half-spaces and polygons; circle and sphere against balls and
    /// half-spaces; similarity push-forwards of any of these, and affine
    /// push-forwards against half-spaces.
    pub fn exact(&self, body: &Body, pose: &AffinePose) -> Option<f64> {
        let tau = pose.dilation;
        let x = pose.translation;
        let hs = world_halfspace(body, pose);
        let v = match &self.repr {
            Repr::Lebesgue { body: support, volume } => match (&support.geom, &body.geom) {
                (Geom::Polygon(p), Geom::Ball { radius, .. }) => {
                    disk_polygon_area(p.vertices(), &x.xy(), tau * radius) / volume
                }
                (Geom::Polygon(p), Geom::HalfSpace { .. }) => {
                    let (n, off) = hs?;
                    halfplane_polygon_area(p.vertices(), &n.xy(), off) / volume
                }
                (Geom::Polygon(p), Geom::Polygon(q)) => p.intersection_area(q, pose) / volume,
                (Geom::Ball { radius: big, dim: Dim::Two }, Geom::Ball { radius, .. }) => {
                    lens_area(*big, tau * radius, x.xy().norm()) / volume
                }
                (Geom::Ball { radius: big, dim: Dim::Two }, Geom::HalfSpace { .. }) => {
                    let (_, off) = hs?;
                    circle_segment_area(*big, off) / volume
                }
                (Geom::Ball { radius: big, dim: Dim::Two }, Geom::Polygon(q)) => {
                    let c = pose.to_local(&Vec3::zeros()).xy();
                    tau * tau * disk_polygon_area(q.vertices(), &c, big / tau) / volume
                }
                (Geom::Ball { radius: big, dim: Dim::Three }, Geom::Ball { radius, .. }) => {
                    lens_volume(*big, tau * radius, x.norm()) / volume
                }
                (Geom::Ball { radius: big, dim: Dim::Three }, Geom::HalfSpace { .. }) => {
                    let (_, off) = hs?;
                    cap_volume(*big, off) / volume
                }
                (Geom::Rects(r), Geom::Ball { radius, .. }) => {
                    let rr = tau * radius;
                    let c = x.xy();
                    let mut s = 0.0;
                    for i in r.indices_in(c.x - rr, c.x + rr).rev() {
                        s += disk_polygon_area(&rect(r.interval(i)), &c, rr);
                    }
                    s / volume
                }
                (Geom::Rects(r), Geom::HalfSpace { .. }) => {
                    let (n, off) = hs?;
                    let mut s = 0.0;
                    for i in (0..r.len()).rev() {
                        s += halfplane_polygon_area(&rect(r.interval(i)), &n.xy(), off);
                    }
                    s / volume
                }
                _ => return None,
            },
            Repr::Curve(c) => {
                let l = match &body.geom {
                    Geom::Ball { radius, .. } => c.length_in_ball(&x.xy(), tau * radius),
                    Geom::HalfSpace { .. } => {
                        let (n, off) = hs?;
                        c.length_in_halfplane(&n.xy(), off)
                    }
                    Geom::Polygon(q) => c.length_in_polygon(q, pose),
                    _ => return None,
                };
                l / c.total_length()
            }
            Repr::Circle { radius: big } => match &body.geom {
                Geom::Ball { radius, .. } => {
                    let (s, d) = (tau * radius, x.xy().norm());
                    if d == 0.0 {
                        (s >= *big) as u8 as f64
                    } else {
                        let k = (big * big + d * d - s * s) / (2.0 * big * d);
                        k.clamp(-1.0, 1.0).acos() / PI
                    }
                }
                Geom::HalfSpace { .. } => {
                    let (_, off) = hs?;
                    (off / big).clamp(-1.0, 1.0).acos() / PI
                }
                _ => return None,
            },
            Repr::Sphere { radius: big } => match &body.geom {
                Geom::Ball { radius, .. } => {
                    let (s, d) = (tau * radius, x.norm());
                    if d == 0.0 {
                        (s >= *big) as u8 as f64
                    } else {
                        let h = (big * big + d * d - s * s) / (2.0 * d);
                        ((big - h) / (2.0 * big)).clamp(0.0, 1.0)
                    }
                }
                Geom::HalfSpace { .. } => {
                    let (_, off) = hs?;
                    ((big - off) / (2.0 * big)).clamp(0.0, 1.0)
                }
                _ => return None,
            },
            Repr::Push { base, map } => match map {
                PreparedMap::Affine { similarity: Some((s, q)), b, .. } => {
                    let qi = match q {
                        Rotation::Planar { angle } => Rotation::planar(-angle),
                        Rotation::Spatial { quaternion: w } => {
                            Rotation::Spatial { quaternion: [w[0], -w[1], -w[2], -w[3]] }
                        }
                    };
                    let local = AffinePose {
                        translation: qi.apply(&(x - b)) / *s,
                        dilation: tau / s,
                        rotation: qi.compose(&pose.rotation).ok()?,
                    };
                    return base.exact(body, &local);
                }
                PreparedMap::Affine { a, b, .. } => {
                    let (n, off) = hs?;
                    let m = a.transpose() * n;
                    let len = m.norm();
                    let theta: Vec<f64> = (0..self.dim.get()).map(|i| m[i] / len).collect();
                    let h = Shape::HalfSpace { theta, rho: (off - b.dot(&n)) / len }.prepare().ok()?;
                    return base.exact(&h, &AffinePose::identity(self.dim));
                }
                PreparedMap::Radial { .. } => return None,
            },
        };
        Some(v.clamp(0.0, 1.0))
    }

    /// One draw from `μ`.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Result<Vec3> {
        match &self.repr {
            Repr::Lebesgue { body, volume } => match &body.geom {
                Geom::Ball { radius, dim: Dim::Two } => {
                    let r = radius * rng.gen::<f64>().sqrt();
                    let t = 2.0 * PI * rng.gen::<f64>();
                    Ok(Vec3::new(r * t.cos(), r * t.sin(), 0.0))
                }
                _ => {
                    let (lo, hi) = body.bbox()?;
                    let ext = hi - lo;
                    let box_vol = if body.dim() == Dim::Two { ext.x * ext.y } else { ext.x * ext.y * ext.z };
                    if volume / box_vol < 1e-3 {
                        return Err(LabError::DegenerateSupport(volume / box_vol));
                    }
                    for _ in 0..1_000_000 {
                        let p = lo + ext.component_mul(&Vec3::new(rng.gen(), rng.gen(), rng.gen()));
                        if body.contains_local(&p) {
                            return Ok(p);
                        }
                    }
                    Err(LabError::DegenerateSupport(0.0))
                }
            },
            Repr::Curve(c) => {
                let n = c.num_segments();
                let i = rng.gen_range(0..n);
                let (a, b) = c.segment(i);
                Ok(to3(a + (b - a) * rng.gen::<f64>()))
            }
            Repr::Circle { radius } => {
                let t = 2.0 * PI * rng.gen::<f64>();
                Ok(Vec3::new(radius * t.cos(), radius * t.sin(), 0.0))
            }
            Repr::Sphere { radius } => Ok(sphere_point(*radius, rng.gen(), rng.gen())),
            Repr::Push { base, map } => Ok(map.apply(&base.sample_point(rng)?)),
        }
    }

    /// `n` iid draws, a pure function of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        if n == 0 {
            return invalid("sample size must be at least 1");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n).map(|_| self.sample_point(&mut rng)).collect::<Result<Vec<_>>>()?;
        PointSet::new(self.dim, points, Generator::Iid, Some(seed), Some(self.spec.id()))
    }

    /// Point at arclength fraction `s` for curve-type measures.
    pub fn curve_point(&self, s: f64) -> Option<Vec3> {
        match &self.repr {
            Repr::Curve(c) => Some(to3(c.point_at(s))),
            Repr::Circle { radius } => {
                let t = 2.0 * PI * s;
                Some(Vec3::new(radius * t.cos(), radius * t.sin(), 0.0))
            }
            Repr::Push { base, map } => base.curve_point(s).map(|p| map.apply(&p)),
            _ => None,
        }
    }
}

pub(crate) fn to3(p: Vec2) -> Vec3 {
    Vec3::new(p.x, p.y, 0.0)
}

pub(crate) fn sphere_point(r: f64, u: f64, v: f64) -> Vec3 {
    let z = 1.0 - 2.0 * u;
    let s = (1.0 - z * z).max(0.0).sqrt();
    let t = 2.0 * PI * v;
    Vec3::new(r * s * t.cos(), r * s * t.sin(), r * z)
}

fn rect((l, r): (f64, f64)) -> [Vec2; 4] {
    [Vec2::new(l, 0.0), Vec2::new(r, 0.0), Vec2::new(r, 1.0), Vec2::new(l, 1.0)]
}

/// Volume of `{y ≥ d}` inside a 3-ball of radius `r` centered at 0.
fn cap_volume(r: f64, d: f64) -> f64 {
    if d >= r {
        0.0
    } else if d <= -r {
        4.0 * PI * r.powi(3) / 3.0
    } else {
        PI * (r - d).powi(2) * (2.0 * r + d) / 3.0
    }
}

/// Volume of the intersection of two 3-balls at center distance `d`.
fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return 4.0 * PI * r1.min(r2).powi(3) / 3.0;
    }
    PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1)
        / (12.0 * d)
}

/// Evaluates a measure exactly where possible, otherwise against an
/// optional empirical surrogate.
#[derive(Clone, Debug)]
pub struct Evaluator {
    measure: PreparedMeasure,
    fallback: Option<EmpiricalMeasure>,
}

impl Evaluator {
    pub fn exact_only(measure: PreparedMeasure) -> Self {
        Evaluator { measure, fallback: None }
    }

    pub fn with_fallback(measure: PreparedMeasure, atoms: usize, seed: u64) -> Result<Self> {
        let fallback = Some(EmpiricalMeasure::from_measure(&measure, atoms, seed)?);
        Ok(Evaluator { measure, fallback })
    }

    pub fn measure(&self) -> &PreparedMeasure {
        &self.measure
    }

    pub fn fallback(&self) -> Option<&EmpiricalMeasure> {
        self.fallback.as_ref()
    }

    pub fn evaluate(&self, body: &Body, pose: &AffinePose) -> Result<Evaluation> {
        self.measure.check_dims(body, pose)?;
        if let Some(v) = self.measure.exact(body, pose) {
            return Ok(Evaluation { value: v, error: 0.0, exact: true });
        }
        match &self.fallback {
            Some(e) => Ok(e.evaluate(body, pose)),
            None => Err(LabError::UnsupportedPair {
                measure: self.measure.spec.id(),
                shape: body.shape().name().into(),
            }),
        }
    }
}

/// `μ(x + τσΩ)` by an exact path; pairs without one are an error.
pub fn evaluate(mu: &MeasureSpec, shape: &Shape, pose: &AffinePose) -> Result<Evaluation> {
    pose.validate()?;
    Evaluator::exact_only(mu.prepare()?).evaluate(&shape.prepare()?, pose)
}
