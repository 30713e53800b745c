//! The discrepancy `𝓓_N(R) = card(P ∩ R) − N·μ(R)` and its quadratic
//! averages over affine families `x + τσΩ` and over half-spaces.
//!
//! Pose averages are reduced in pose-index order, so estimates do not
//! depend on the number of worker threads.

use std::fs::OpenOptions;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{AffinePose, Body, Dim, Rotation, Shape, Vec3};
use crate::measure::{Evaluator, MeasureSpec, PreparedMeasure};
use crate::pointset::PointSet;
use crate::qmc::ScrambledHalton;
use crate::stats::mean_se;

mod index;
mod witness;

pub use index::PointIndex;
pub use witness::{witness_search, Witness, WitnessPose};

/// Smallest pose budget accepted by the averaging estimators.
pub const MIN_POSES: usize = 1000;

/// Axis-aligned box of translations; `z` bounds are zero in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl TranslationBox {
    /// The cube `[−h, h]^d`.
    pub fn cube(dim: Dim, h: f64) -> Self {
        let z = if dim == Dim::Three { h } else { 0.0 };
        TranslationBox { lo: [-h, -h, -z], hi: [h, h, z] }
    }

    pub fn volume(&self, dim: Dim) -> f64 {
        (0..dim.get()).map(|i| self.hi[i] - self.lo[i]).product()
    }

    fn at(&self, u: &[f64]) -> Vec3 {
        let mut x = Vec3::zeros();
        for (i, ui) in u.iter().enumerate() {
            x[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * ui;
        }
        x
    }

    /// Whether the box contains the ball `B(0, r)`.
    fn holds_ball(&self, dim: Dim, r: f64) -> bool {
        // Relative slack absorbs rounding in point norms.
        let r = r * (1.0 - 1e-12);
        (0..dim.get()).all(|i| self.lo[i] <= -r && self.hi[i] >= r)
    }
}

/// A family of test sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum FamilySpec {
    /// `{x + τσΩ : x ∈ box, a ≤ τ ≤ b, σ ∈ SO(d)}`.
    Affine { shape: Shape, a: f64, b: f64, translation_box: TranslationBox },
    /// `{x·Θ > ρ : 0 ≤ ρ ≤ r₀, Θ ∈ S^{d−1}}`.
    HalfSpace { rho_max: f64 },
}

impl FamilySpec {
    /// Affine family with the smallest centered cube that holds every
    /// translation for which `x + τσΩ` can meet `B(0, r₀)`.
    pub fn affine(shape: Shape, a: f64, b: f64, mu: &PreparedMeasure) -> Result<Self> {
        let body = shape.prepare()?;
        let h = mu.support_radius() + b * body.bounding_radius();
        if !h.is_finite() {
            return Err(LabError::UnboundedVolume);
        }
        let f = FamilySpec::Affine { shape, a, b, translation_box: TranslationBox::cube(mu.dim(), h) };
        f.validate()?;
        Ok(f)
    }

    pub fn halfspace(mu: &PreparedMeasure) -> Self {
        FamilySpec::HalfSpace { rho_max: mu.support_radius() }
    }

    pub fn name(&self) -> String {
        match self {
            FamilySpec::Affine { shape, a, b, .. } => format!("affine:{}:{a}:{b}", shape.name()),
            FamilySpec::HalfSpace { rho_max } => format!("halfspace:{rho_max}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Affine { a, b, translation_box: t, .. } => {
                if !(a.is_finite() && b.is_finite() && 0.0 < *a && a < b) {
                    return invalid(format!("dilation range needs 0 < a < b, got a = {a}, b = {b}"));
                }
                if (0..3).any(|i| !(t.lo[i] <= t.hi[i]) || !t.lo[i].is_finite() || !t.hi[i].is_finite()) {
                    return invalid("translation box bounds must be finite with lo ≤ hi");
                }
                Ok(())
            }
            FamilySpec::HalfSpace { rho_max } if !(rho_max.is_finite() && *rho_max > 0.0) => {
                invalid(format!("rho_max must be positive, got {rho_max}"))
            }
            FamilySpec::HalfSpace { .. } => Ok(()),
        }
    }
}

/// Pose budget and seed of an average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_poses: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_poses: usize, seed: u64) -> Self {
        McConfig { n_poses, seed }
    }
}

/// Square root of a pose-averaged squared discrepancy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_poses: usize,
    pub seed: u64,
}

impl L2Estimate {
    /// From `𝓓²` samples and the family volume `K`: `√(K·mean)` with the
    /// delta-method error `K·se/(2·value)`.
    fn from_squares(squares: &[f64], volume: f64, seed: u64) -> Self {
        let m = mean_se(squares);
        let value = (volume * m.mean).sqrt();
        let stderr = if value > 0.0 { volume * m.stderr / (2.0 * value) } else { (volume * m.stderr).sqrt() };
        L2Estimate { value, stderr, n_poses: squares.len(), seed }
    }
}

/// One line of the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_poses: usize,
    pub seed: u64,
}

impl RunRecord {
    pub fn new(family: &FamilySpec, n: usize, est: &L2Estimate) -> Self {
        RunRecord {
            family: family.name(),
            n,
            value: est.value,
            stderr: est.stderr,
            n_poses: est.n_poses,
            seed: est.seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Appends to a CSV log, writing the header when the file is new or empty.
    pub fn append_csv(&self, path: &Path) -> Result<()> {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        w.serialize(self)?;
        w.flush()?;
        Ok(())
    }
}

/// Points, a measure and an index, ready for repeated discrepancy queries.
pub struct Discrepancy<'a> {
    points: &'a PointSet,
    index: PointIndex,
    eval: &'a Evaluator,
}

impl<'a> Discrepancy<'a> {
    pub fn new(points: &'a PointSet, eval: &'a Evaluator) -> Result<Self> {
        if points.dim() != eval.measure().dim() {
            return Err(LabError::InvalidPose(format!(
                "point set is {}-dimensional but the measure is {}-dimensional",
                points.dim().get(),
                eval.measure().dim().get()
            )));
        }
        Ok(Discrepancy { points, index: PointIndex::new(points), eval })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> Dim {
        self.points.dim()
    }

    /// `card(P ∩ (x + τσΩ))`.
    pub fn count(&self, body: &Body, pose: &AffinePose) -> usize {
        let r = pose.dilation * body.bounding_radius();
        let mut k = 0;
        self.index.visit_ball(&pose.translation, r, |p| {
            if body.contains(pose, p) {
                k += 1;
            }
        });
        k
    }

    /// `𝓓_N(x + τσΩ)`.
    pub fn at(&self, body: &Body, pose: &AffinePose) -> Result<f64> {
        let m = self.eval.evaluate(body, pose)?.value;
        Ok(self.count(body, pose) as f64 - self.n() as f64 * m)
    }

    /// `card(P ∩ {x·Θ > ρ})`.
    pub fn halfspace_count(&self, theta: &Vec3, rho: f64) -> usize {
        self.points.points().iter().filter(|p| p.dot(theta) > rho).count()
    }

    /// `μ({x·Θ ≥ ρ})`; the boundary hyperplane is μ-null for every
    /// supported measure with an exact half-space path.
    pub fn halfspace_measure(&self, theta: &Vec3, rho: f64) -> Result<f64> {
        let d = self.dim().get();
        let shape = Shape::HalfSpace { theta: theta.iter().take(d).copied().collect(), rho };
        Ok(self.eval.evaluate(&shape.prepare()?, &AffinePose::identity(self.dim()))?.value)
    }

    /// `𝓓_N({x·Θ > ρ})`.
    pub fn halfspace(&self, theta: &Vec3, rho: f64) -> Result<f64> {
        let m = self.halfspace_measure(theta, rho)?;
        Ok(self.halfspace_count(theta, rho) as f64 - self.n() as f64 * m)
    }
}

/// `𝓓_N(x + τσΩ)` for a single pose, exact measure paths only.
pub fn discrepancy_at(points: &PointSet, mu: &MeasureSpec, shape: &Shape, pose: &AffinePose) -> Result<f64> {
    pose.validate()?;
    let eval = Evaluator::exact_only(mu.prepare()?);
    let body = shape.prepare()?;
    if body.dim() != points.dim() || pose.dim() != points.dim() {
        return Err(LabError::InvalidPose("point set, shape and pose dimensions differ".into()));
    }
    Discrepancy::new(points, &eval)?.at(&body, pose)
}

pub(crate) fn pose_dims(dim: Dim) -> usize {
    match dim {
        Dim::Two => 4,
        Dim::Three => 7,
    }
}

pub(crate) fn halfspace_dims(dim: Dim) -> usize {
    match dim {
        Dim::Two => 2,
        Dim::Three => 4,
    }
}

/// Maps `u ∈ [0,1)^k` to `(x, τ, σ)`; rotations follow Haar measure.
pub(crate) fn affine_pose(u: &[f64], dim: Dim, a: f64, b: f64, tbox: &TranslationBox) -> AffinePose {
    let d = dim.get();
    AffinePose {
        translation: tbox.at(&u[..d]),
        dilation: a + (b - a) * u[d],
        rotation: Rotation::uniform(dim, &u[d + 1..]),
    }
}

/// Maps `u ∈ [0,1)^k` to `(Θ, ρ)` with `Θ = σe₁` for Haar-uniform `σ` and
/// `ρ` uniform in `[0, r₀]`.
pub(crate) fn halfspace_draw(u: &[f64], dim: Dim, rho_max: f64) -> (Vec3, f64) {
    let theta = Rotation::uniform(dim, &u[1..]).apply(&Vec3::x());
    (theta, rho_max * u[0])
}

pub(crate) fn check_budget(mc: &McConfig) -> Result<()> {
    if mc.n_poses < MIN_POSES {
        return invalid(format!("n_poses = {} is below {MIN_POSES}", mc.n_poses));
    }
    Ok(())
}

/// `(∫∫∫ |𝓓_N(x + τσΩ)|² dx dτ dσ)^{1/2}` by scrambled-Halton averaging,
/// with `dσ` the Haar probability measure.
pub fn l2_affine(points: &PointSet, eval: &Evaluator, family: &FamilySpec, mc: &McConfig) -> Result<L2Estimate> {
    let FamilySpec::Affine { shape, a, b, translation_box } = family else {
        return invalid("l2_affine needs an affine family");
    };
    family.validate()?;
    check_budget(mc)?;
    if points.is_empty() {
        return invalid("empty point set");
    }
    let disc = Discrepancy::new(points, eval)?;
    let body = shape.prepare()?;
    let dim = disc.dim();
    if body.dim() != dim {
        return Err(LabError::InvalidPose("shape and point set dimensions differ".into()));
    }
    let far = points.points().iter().map(|p| p.norm()).fold(eval.measure().support_radius(), f64::max);
    let need = far + b * body.bounding_radius();
    if !translation_box.holds_ball(dim, need) {
        return Err(LabError::BoxTooSmall(format!(
            "translations on the box boundary reach the points or the support; the box must contain B(0, {need})"
        )));
    }
    let h = ScrambledHalton::new(pose_dims(dim), mc.seed);
    let squares = (0..mc.n_poses as u64)
        .into_par_iter()
        .map(|i| {
            let pose = affine_pose(&h.point(i), dim, *a, *b, translation_box);
            disc.at(&body, &pose).map(|v| v * v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let volume = translation_box.volume(dim) * (b - a);
    Ok(L2Estimate::from_squares(&squares, volume, mc.seed))
}

/// `(∫₀^{r₀} ∫_{S^{d−1}} |𝓓_N({x·Θ > ρ})|² dΘ dρ)^{1/2}` with `dΘ` the
/// normalized surface measure.
pub fn l2_halfspace(points: &PointSet, eval: &Evaluator, family: &FamilySpec, mc: &McConfig) -> Result<L2Estimate> {
    let FamilySpec::HalfSpace { rho_max } = family else {
        return invalid("l2_halfspace needs a half-space family");
    };
    family.validate()?;
    check_budget(mc)?;
    if points.is_empty() {
        return invalid("empty point set");
    }
    points.check_within(rho_max * (1.0 + 1e-12))?;
    if eval.measure().support_radius() > rho_max * (1.0 + 1e-12) {
        return invalid(format!(
            "support radius {} exceeds rho_max = {rho_max}",
            eval.measure().support_radius()
        ));
    }
    let disc = Discrepancy::new(points, eval)?;
    let dim = disc.dim();
    let h = ScrambledHalton::new(halfspace_dims(dim), mc.seed);
    let squares = (0..mc.n_poses as u64)
        .into_par_iter()
        .map(|i| {
            let (theta, rho) = halfspace_draw(&h.point(i), dim, *rho_max);
            disc.halfspace(&theta, rho).map(|v| v * v)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(L2Estimate::from_squares(&squares, *rho_max, mc.seed))
}

/// Dispatches on the family variant.
pub fn l2(points: &PointSet, eval: &Evaluator, family: &FamilySpec, mc: &McConfig) -> Result<L2Estimate> {
    match family {
        FamilySpec::Affine { .. } => l2_affine(points, eval, family, mc),
        FamilySpec::HalfSpace { .. } => l2_halfspace(points, eval, family, mc),
    }
}

/// One radius of the ball-to-half-space limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub radius: f64,
    pub ball_count: usize,
    pub halfspace_count: usize,
    pub ball_measure: f64,
    pub halfspace_measure: f64,
    pub ball_discrepancy: f64,
    pub halfspace_discrepancy: f64,
    /// `|𝓓_ball − 𝓓_halfspace|`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub theta: [f64; 3],
    pub rho: f64,
    pub rows: Vec<LimitRow>,
    /// First radius from which the ball and half-space counts agree for
    /// the rest of the sequence.
    pub r_star: Option<f64>,
}

/// Discrepancy of the balls `B((ρ + R)Θ, R)` against that of `{x·Θ > ρ}`
/// as `R` grows.
pub fn ball_to_halfspace_limit(
    points: &PointSet,
    eval: &Evaluator,
    theta: &Vec3,
    rho: f64,
    radii: &[f64],
) -> Result<LimitTable> {
    let r0 = eval.measure().support_radius();
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("radii must be a nonempty increasing sequence");
    }
    if !(radii[0] > r0) {
        return invalid(format!("smallest radius {} must exceed r₀ = {r0}", radii[0]));
    }
    let n = theta.norm();
    if !(n > 0.0 && n.is_finite()) {
        return invalid("direction must be a nonzero vector");
    }
    let theta = theta / n;
    let disc = Discrepancy::new(points, eval)?;
    let dim = disc.dim();
    let hs_count = disc.halfspace_count(&theta, rho);
    let hs_measure = disc.halfspace_measure(&theta, rho)?;
    let hs_disc = hs_count as f64 - disc.n() as f64 * hs_measure;
    let ball = Shape::Ball { radius: 1.0, dim }.prepare()?;
    let rows = radii
        .iter()
        .map(|&r| {
            let pose = AffinePose { translation: theta * (rho + r), dilation: r, rotation: Rotation::identity(dim) };
            let c = disc.count(&ball, &pose);
            let m = eval.evaluate(&ball, &pose)?.value;
            let d = c as f64 - disc.n() as f64 * m;
            Ok(LimitRow {
                radius: r,
                ball_count: c,
                halfspace_count: hs_count,
                ball_measure: m,
                halfspace_measure: hs_measure,
                ball_discrepancy: d,
                halfspace_discrepancy: hs_disc,
                gap: (d - hs_disc).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r_star = None;
    for row in rows.iter().rev() {
        if row.ball_count != row.halfspace_count {
            break;
        }
        r_star = Some(row.radius);
    }
    Ok(LimitTable { theta: [theta.x, theta.y, theta.z], rho, rows, r_star })
}

/// `(cos θ, sin θ, 0)`.
pub fn planar_direction(angle: f64) -> Vec3 {
    Vec3::new(angle.cos(), angle.sin(), 0.0)
}
