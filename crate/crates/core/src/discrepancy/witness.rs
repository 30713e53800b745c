//! Heuristic search for a single test set with large `|𝓓_N|`.
//!
//! The search is a fixed, budget-independent stream of evaluations: blocks
//! of scrambled-Halton scan points alternate with golden-section sweeps
//! over the translation, dilation or offset coordinates of the incumbent.
//! A larger budget runs a longer prefix of the same stream, so the best
//! value found never decreases with the budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    affine_pose, halfspace_dims, halfspace_draw, pose_dims, Discrepancy, FamilySpec, MIN_POSES,
};
use crate::error::{invalid, LabError, Result};
use crate::geometry::{AffinePose, Body};
use crate::measure::Evaluator;
use crate::pointset::PointSet;
use crate::qmc::ScrambledHalton;

const BLOCK: usize = 256;
const GOLDEN_STEPS: usize = 10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessPose {
    Affine(AffinePose),
    HalfSpace { theta: [f64; 3], rho: f64 },
}

/// Best test set found; `abs` is a lower bound for the supremum of `|𝓓_N|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pose: WitnessPose,
    /// Signed discrepancy at `pose`.
    pub value: f64,
    pub abs: f64,
    pub evaluations: usize,
}

enum Target<'a> {
    Affine { body: Body, a: f64, b: f64, tbox: &'a super::TranslationBox },
    HalfSpace { rho_max: f64 },
}

struct Search<'a> {
    disc: Discrepancy<'a>,
    target: Target<'a>,
    // Coordinates refined by golden section.
    refine: Vec<usize>,
    budget: usize,
    used: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl Search<'_> {
    fn eval(&self, u: &[f64]) -> Result<f64> {
        let dim = self.disc.dim();
        match &self.target {
            Target::Affine { body, a, b, tbox } => self.disc.at(body, &affine_pose(u, dim, *a, *b, tbox)),
            Target::HalfSpace { rho_max } => {
                let (theta, rho) = halfspace_draw(u, dim, *rho_max);
                self.disc.halfspace(&theta, rho)
            }
        }
    }

    fn left(&self) -> usize {
        self.budget - self.used
    }

    fn offer(&mut self, u: Vec<f64>, v: f64) {
        if self.best.as_ref().is_none_or(|(_, b)| v.abs() > b.abs()) {
            self.best = Some((u, v));
        }
    }

    /// `|𝓓|` at `u`, or `None` once the budget is spent.
    fn probe(&mut self, u: Vec<f64>) -> Result<Option<f64>> {
        if self.left() == 0 {
            return Ok(None);
        }
        self.used += 1;
        let v = self.eval(&u)?;
        self.offer(u, v);
        Ok(Some(v.abs()))
    }

    fn scan(&mut self, h: &ScrambledHalton, start: usize) -> Result<()> {
        let m = BLOCK.min(self.left());
        let us: Vec<Vec<f64>> = (start..start + m).map(|i| h.point(i as u64)).collect();
        let vs = us.par_iter().map(|u| self.eval(u)).collect::<Result<Vec<f64>>>()?;
        self.used += m;
        for (u, v) in us.into_iter().zip(vs) {
            self.offer(u, v);
        }
        Ok(())
    }

    /// Golden-section sweep of coordinate `c` over `[u_c − w, u_c + w]`.
    fn sweep(&mut self, c: usize, w: f64) -> Result<()> {
        let Some((base, _)) = self.best.clone() else { return Ok(()) };
        let at = |t: f64| {
            let mut u = base.clone();
            u[c] = t;
            u
        };
        let (mut lo, mut hi) = ((base[c] - w).max(0.0), (base[c] + w).min(1.0 - f64::EPSILON));
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let Some(mut f1) = self.probe(at(x1))? else { return Ok(()) };
        let Some(mut f2) = self.probe(at(x2))? else { return Ok(()) };
        for _ in 0..GOLDEN_STEPS {
            if f1 >= f2 {
                hi = x2;
                (x2, f2) = (x1, f1);
                x1 = hi - INV_PHI * (hi - lo);
                let Some(f) = self.probe(at(x1))? else { return Ok(()) };
                f1 = f;
            } else {
                lo = x1;
                (x1, f1) = (x2, f2);
                x2 = lo + INV_PHI * (hi - lo);
                let Some(f) = self.probe(at(x2))? else { return Ok(()) };
                f2 = f;
            }
        }
        Ok(())
    }
}

/// Coarse scan plus coordinate-wise golden-section refinement, stopping
/// after exactly `budget` evaluations of `𝓓_N`.
pub fn witness_search(
    points: &PointSet,
    eval: &Evaluator,
    family: &FamilySpec,
    budget: usize,
    seed: u64,
) -> Result<Witness> {
    family.validate()?;
    if budget < MIN_POSES {
        return invalid(format!("budget = {budget} is below {MIN_POSES}"));
    }
    if points.is_empty() {
        return invalid("empty point set");
    }
    let disc = Discrepancy::new(points, eval)?;
    let dim = disc.dim();
    let d = dim.get();
    let (target, k, refine) = match family {
        FamilySpec::Affine { shape, a, b, translation_box } => {
            let body = shape.prepare()?;
            if body.dim() != dim {
                return Err(LabError::InvalidPose("shape and point set dimensions differ".into()));
            }
            (Target::Affine { body, a: *a, b: *b, tbox: translation_box }, pose_dims(dim), (0..=d).collect())
        }
        FamilySpec::HalfSpace { rho_max } => {
            (Target::HalfSpace { rho_max: *rho_max }, halfspace_dims(dim), vec![0])
        }
    };
    let h = ScrambledHalton::new(k, seed);
    let mut s = Search { disc, target, refine, budget, used: 0, best: None };
    let mut next = 0usize;
    let mut round = 0i32;
    while s.left() > 0 {
        s.scan(&h, next)?;
        next += BLOCK;
        let w = 0.125 * 0.5f64.powi(round % 8);
        for c in s.refine.clone() {
            s.sweep(c, w)?;
        }
        round += 1;
    }
    let (u, value) = s.best.expect("budget is positive");
    let pose = match &s.target {
        Target::Affine { a, b, tbox, .. } => WitnessPose::Affine(affine_pose(&u, dim, *a, *b, tbox)),
        Target::HalfSpace { rho_max } => {
            let (t, rho) = halfspace_draw(&u, dim, *rho_max);
            WitnessPose::HalfSpace { theta: [t.x, t.y, t.z], rho }
        }
    };
    Ok(Witness { pose, value, abs: value.abs(), evaluations: s.used })
}

