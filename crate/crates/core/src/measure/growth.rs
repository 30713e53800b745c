use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sphere_point, PreparedMeasure};
use crate::error::{invalid, Result};
use crate::geometry::{AffinePose, Dim, Rotation, Shape, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthOptions {
    pub trials: usize,
    pub seed: u64,
    /// Exponent tested; defaults to the measure's declared `α`.
    pub alpha: Option<f64>,
    pub r_min: f64,
    /// Defaults to the support diameter.
    pub r_max: Option<f64>,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions { trials: 1000, seed: 0, alpha: None, r_min: 1e-3, r_max: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub alpha: f64,
    pub c_hat: f64,
    pub worst_center: [f64; 3],
    pub worst_radius: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub trials: usize,
}

/// Largest observed `μ(B(x,r)) / r^α`. Trial `i` draws its center and
/// radius from its own stream, so two measures sharing a parametrization
/// (Koch curves of different levels, say) are probed at matching balls.
pub fn verify_growth(mu: &PreparedMeasure, opts: &GrowthOptions) -> Result<GrowthReport> {
    if opts.trials < 1000 {
        return invalid("growth check needs at least 1000 trials");
    }
    let alpha = opts.alpha.unwrap_or(mu.alpha());
    let r_max = opts.r_max.unwrap_or(mu.diameter());
    if !(opts.r_min > 0.0 && r_max > opts.r_min) {
        return invalid("growth check needs 0 < r_min < r_max");
    }
    let dim = mu.dim();
    let ball = Shape::Ball { radius: 1.0, dim }.prepare()?;
    let evaluator = super::Evaluator::exact_only(mu.clone());
    let ratios = (0..opts.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let s: f64 = rng.gen();
            let center = match mu.curve_point(s) {
                Some(p) => p,
                None => mu.sample_point(&mut rng)?,
            };
            let r = opts.r_min * (r_max / opts.r_min).powf(rng.gen::<f64>());
            let x = if rng.gen::<f64>() < 0.5 {
                let u: f64 = rng.gen();
                let dir = match dim {
                    Dim::Two => {
                        let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                        Vec3::new(t.cos(), t.sin(), 0.0)
                    }
                    Dim::Three => sphere_point(1.0, rng.gen(), rng.gen()),
                };
                center + dir * (r * u)
            } else {
                center
            };
            let pose = AffinePose { translation: x, dilation: r, rotation: Rotation::identity(dim) };
            let m = evaluator.evaluate(&ball, &pose)?.value;
            Ok((m / r.powf(alpha), x, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = ratios[0];
    for t in &ratios[1..] {
        if t.0 > best.0 {
            best = *t;
        }
    }
    Ok(GrowthReport {
        alpha,
        c_hat: best.0,
        worst_center: [best.1.x, best.1.y, best.1.z],
        worst_radius: best.2,
        r_min: opts.r_min,
        r_max,
        trials: opts.trials,
    })
}
