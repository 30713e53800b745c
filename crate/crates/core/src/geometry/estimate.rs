//! Monte Carlo estimates of symmetric differences and Minkowski shells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Body, Dim, Shape, Vec3};
use crate::error::{invalid, LabError, Result};
use crate::stats::ols;

/// A Monte Carlo value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Jittered stratified sampling of `f` over the box `[lo, hi]`, one point per
/// stratum. Each row of strata draws from its own ChaCha stream, so the
/// result does not depend on the thread count. The reported error uses the
/// iid formula, which overstates the error of a stratified design.
fn stratified(lo: Vec3, hi: Vec3, dim: Dim, samples: usize, seed: u64, f: impl Fn(&Vec3) -> f64 + Sync) -> McValue {
    let ext = hi - lo;
    let (k, rows, per_row, vol) = match dim {
        Dim::Two => {
            let k = (samples as f64).sqrt().ceil() as usize;
            (k, k, k, ext.x * ext.y)
        }
        Dim::Three => {
            let k = (samples as f64).cbrt().ceil() as usize;
            (k, k * k, k, ext.x * ext.y * ext.z)
        }
    };
    let sums: Vec<(f64, f64)> = (0..rows)
        .into_par_iter()
        .map(|row| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(row as u64);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for i in 0..per_row {
                let p = match dim {
                    Dim::Two => Vec3::new(
                        lo.x + ext.x * (i as f64 + rng.gen::<f64>()) / k as f64,
                        lo.y + ext.y * (row as f64 + rng.gen::<f64>()) / k as f64,
                        0.0,
                    ),
                    Dim::Three => Vec3::new(
                        lo.x + ext.x * (i as f64 + rng.gen::<f64>()) / k as f64,
                        lo.y + ext.y * ((row % k) as f64 + rng.gen::<f64>()) / k as f64,
                        lo.z + ext.z * ((row / k) as f64 + rng.gen::<f64>()) / k as f64,
                    ),
                };
                let v = f(&p);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let n = rows * per_row;
    let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = s / n as f64;
    let var = ((s2 / n as f64 - mean * mean) * n as f64 / (n - 1) as f64).max(0.0);
    McValue { value: vol * mean, stderr: vol * (var / n as f64).sqrt(), samples: n }
}

fn sampling_box(body: &Body, margin: f64) -> Result<(Vec3, Vec3)> {
    let (lo, hi) = body.bbox()?;
    let m = match body.dim() {
        Dim::Two => Vec3::new(margin, margin, 0.0),
        Dim::Three => Vec3::repeat(margin),
    };
    Ok((lo - m, hi + m))
}

/// `|(h + Ω) △ Ω|` for a prepared body, with antithetic pairs `(p − h, p, p + h)`.
pub(crate) fn body_symmetric_difference(body: &Body, h: &Vec3, samples: usize, seed: u64) -> Result<McValue> {
    if samples < 1000 {
        return invalid("symmetric difference needs at least 1000 samples");
    }
    if body.volume()? == 0.0 {
        return Err(LabError::ZeroVolume);
    }
    if !h.iter().all(|v| v.is_finite()) {
        return invalid("shift must be finite");
    }
    let (lo, hi) = sampling_box(body, h.norm())?;
    Ok(stratified(lo, hi, body.dim(), samples, seed, |p| {
        let c = body.contains_local(p);
        let a = (c != body.contains_local(&(p - h))) as u8 as f64;
        let b = (c != body.contains_local(&(p + h))) as u8 as f64;
        0.5 * (a + b)
    }))
}

/// Monte Carlo estimate of `|(h + Ω) △ Ω|`, deterministic in `seed`.
pub fn symmetric_difference_volume(shape: &Shape, h: &Vec3, samples: usize, seed: u64) -> Result<McValue> {
    body_symmetric_difference(&shape.prepare()?, h, samples, seed)
}

/// Monte Carlo estimate of `|{z : dist(z, ∂Ω) ≤ t}|`.
pub fn minkowski_shell_volume(shape: &Shape, t: f64, samples: usize, seed: u64) -> Result<McValue> {
    if !(t > 0.0 && t < 1.0) {
        return invalid(format!("shell width {t} must lie in (0, 1)"));
    }
    if samples < 1000 {
        return invalid("shell volume needs at least 1000 samples");
    }
    let body = shape.prepare()?;
    let (lo, hi) = sampling_box(&body, t)?;
    body.boundary_within(&Vec3::zeros(), t)?;
    Ok(stratified(lo, hi, body.dim(), samples, seed, |p| body.boundary_within(p, t).unwrap_or(false) as u8 as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub t: f64,
    pub volume: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta_hat: f64,
    pub beta_stderr: f64,
    /// `max |△| / t^β̂`.
    pub kappa1_hat: f64,
    /// `min |△| / t^β̂`.
    pub kappa2_hat: f64,
    /// `max t_n / t_{n+1}` of the supplied sequence.
    pub kappa3: f64,
    pub rows: Vec<BetaRow>,
}

/// Fit `|(tΘ + Ω) △ Ω| ≈ κ t^β` over a decreasing sequence of shifts.
pub fn fit_beta(shape: &Shape, direction: &Vec3, ts: &[f64], samples: usize, seed: u64) -> Result<BetaFit> {
    if ts.len() < 4 {
        return invalid("fit_beta needs at least 4 scales");
    }
    if ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) || ts.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("t sequence must be positive and strictly decreasing");
    }
    let n = direction.norm();
    if (n - 1.0).abs() > 1e-9 {
        return invalid("direction must be a unit vector");
    }
    let body = shape.prepare()?;
    let mut rows = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let v = body_symmetric_difference(&body, &(direction * t), samples, seed.wrapping_add(i as u64))?;
        rows.push(BetaRow { t, volume: v.value, stderr: v.stderr });
    }
    if rows.iter().any(|r| r.volume <= 0.0) {
        return invalid("a symmetric difference estimate vanished; increase samples");
    }
    let x: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.volume.ln()).collect();
    let fit = ols(&x, &y);
    let ratios: Vec<f64> = rows.iter().map(|r| r.volume / r.t.powf(fit.slope)).collect();
    Ok(BetaFit {
        beta_hat: fit.slope,
        beta_stderr: fit.slope_stderr,
        kappa1_hat: ratios.iter().cloned().fold(f64::MIN, f64::max),
        kappa2_hat: ratios.iter().cloned().fold(f64::MAX, f64::min),
        kappa3: ts.windows(2).map(|w| w[0] / w[1]).fold(0.0, f64::max),
        rows,
    })
}
