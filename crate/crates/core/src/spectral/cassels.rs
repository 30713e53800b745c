//! Centered exponential sums: the Cassels–Montgomery mass and the
//! Plancherel identity linking spatial and spectral discrepancy.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::posed_indicator_ft;
use crate::discrepancy::Discrepancy;
use crate::error::{invalid, LabError, Result};
use crate::geometry::{AffinePose, Dim, Rotation, Shape, Vec3};
use crate::measure::{Evaluator, PreparedMeasure};
use crate::pointset::PointSet;

/// Frequency lattice for [`cassels_montgomery`]: cell centers
/// `(k + 1/2)·spacing` masked to the annulus `1 ≤ |ξ| ≤ M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasselsQuad {
    pub spacing: f64,
}

impl CasselsQuad {
    /// Eight cells per shortest wavelength `1/diam` of the point cloud,
    /// capped at 0.1.
    pub fn auto(points: &PointSet) -> Self {
        let pts = points.points();
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let diam = (hi - lo).norm().max(1e-3);
        CasselsQuad { spacing: (1.0 / (8.0 * diam)).min(0.1) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasselsValue {
    pub value: f64,
    /// `|I(h) − I(2h)|` between the chosen lattice and one twice as coarse.
    pub discretization: f64,
    pub m: f64,
    pub n: usize,
    pub spacing: f64,
}

/// `∫_{1≤|ξ|≤M} |Σ_j e^{−2πiξ·z_j} − Nμ̂(ξ)|² dξ` as a lattice sum.
pub fn cassels_montgomery(points: &PointSet, mu: &PreparedMeasure, m: f64, quad: &CasselsQuad) -> Result<CasselsValue> {
    if points.dim() != mu.dim() {
        return invalid("points and measure dimensions differ");
    }
    if !(m > 1.0 && m.is_finite()) {
        return invalid(format!("M = {m} must exceed 1"));
    }
    if !(quad.spacing > 0.0 && quad.spacing <= 0.5) {
        return invalid(format!("lattice spacing {} must lie in (0, 1/2]", quad.spacing));
    }
    mu.fourier(&Vec3::new(1.0, 0.0, 0.0))?;
    let fine = lattice_sum(points, mu, m, quad.spacing)?;
    let coarse = lattice_sum(points, mu, m, 2.0 * quad.spacing)?;
    Ok(CasselsValue { value: fine, discretization: (fine - coarse).abs(), m, n: points.len(), spacing: quad.spacing })
}

/// One lattice row `ξ = (x₀ + ih, y, z)`: the phases `e^{−2πiξ·z_j}` advance
/// by a fixed factor per step.
fn row_sum(points: &[Vec3], mu: &PreparedMeasure, m: f64, h: f64, y: f64, z: f64) -> Result<f64> {
    let r2 = y * y + z * z;
    if r2 > m * m {
        return Ok(0.0);
    }
    let half = (m * m - r2).sqrt();
    let kmax = (half / h).ceil() as i64;
    let x0 = (-kmax as f64 + 0.5) * h;
    let cells = 2 * kmax as usize;
    let n = points.len() as f64;
    let mut sums = vec![Complex64::new(0.0, 0.0); cells];
    for p in points {
        let step = Complex64::from_polar(1.0, -2.0 * PI * h * p.x);
        let mut e = Complex64::from_polar(1.0, -2.0 * PI * (x0 * p.x + y * p.y + z * p.z));
        for (i, s) in sums.iter_mut().enumerate() {
            // Reseed periodically so the running product stays on the circle.
            if i % 256 == 255 {
                e = Complex64::from_polar(1.0, -2.0 * PI * ((x0 + i as f64 * h) * p.x + y * p.y + z * p.z));
            }
            *s += e;
            e *= step;
        }
    }
    let mut acc = 0.0;
    for (i, s) in sums.iter().enumerate() {
        let xi = Vec3::new(x0 + i as f64 * h, y, z);
        let r = xi.norm();
        if (1.0..=m).contains(&r) {
            acc += (s - mu.fourier(&xi)?.value() * n).norm_sqr();
        }
    }
    Ok(acc)
}

fn lattice_sum(points: &PointSet, mu: &PreparedMeasure, m: f64, h: f64) -> Result<f64> {
    let kmax = (m / h).ceil() as i64;
    let offsets: Vec<f64> = (-kmax..kmax).map(|k| (k as f64 + 0.5) * h).collect();
    let pts = points.points();
    let rows: Vec<(f64, f64)> = match points.dim() {
        Dim::Two => offsets.iter().map(|&y| (y, 0.0)).collect(),
        Dim::Three => offsets.iter().flat_map(|&y| offsets.iter().map(move |&z| (y, z))).collect(),
    };
    let parts = rows.par_iter().map(|&(y, z)| row_sum(pts, mu, m, h, y, z)).collect::<Result<Vec<f64>>>()?;
    let cell = h.powi(points.dim().get() as i32);
    Ok(parts.iter().sum::<f64>() * cell)
}

/// Translation lattice for [`plancherel_bridge`]: `l × l` cells over the
/// square of side `side` centered at the origin. The spectral side uses
/// the dual lattice `k/side`, `|k_i| < l/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeGrid {
    pub l: usize,
    pub side: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeValue {
    pub spatial: f64,
    pub spectral: f64,
    pub gap: f64,
}

/// `∫|𝓓_N(x, τ, σ)|² dx` two ways: a midpoint sum over translations, and
/// `∫|Σ_j e^{−2πiξ·z_j} − Nμ̂(ξ)|²·|χ̂_{τσΩ}(ξ)|² dξ` over the dual lattice.
/// The second is a Fourier series of a function supported in the box, so
/// its only error is the frequency truncation.
pub fn plancherel_bridge(
    points: &PointSet,
    eval: &Evaluator,
    shape: &Shape,
    tau: f64,
    sigma: &Rotation,
    grid: &BridgeGrid,
) -> Result<BridgeValue> {
    let mu = eval.measure();
    if mu.dim() != Dim::Two || points.dim() != Dim::Two {
        return invalid("the Plancherel bridge is planar");
    }
    if !grid.l.is_power_of_two() || grid.l < 16 {
        return invalid(format!("grid size {} must be a power of two ≥ 16", grid.l));
    }
    let body = shape.prepare()?;
    let reach = tau * body.bounding_radius()
        + points.points().iter().map(|p| p.norm()).fold(mu.support_radius(), f64::max);
    if grid.side < 2.0 * reach {
        return Err(LabError::BoxTooSmall(format!("side {} < {}", grid.side, 2.0 * reach)));
    }
    let h = grid.side / grid.l as f64;
    let pts = points.points();
    let mut spacing = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            spacing = spacing.min((a - b).norm());
        }
    }
    if h > spacing || h > tau * body.bounding_radius() / 4.0 {
        return invalid(format!("cell {h} does not resolve the point spacing {spacing} and the body scale"));
    }

    let disc = Discrepancy::new(points, eval)?;
    let l = grid.l;
    let x0 = -grid.side / 2.0 + h / 2.0;
    let spatial_rows = (0..l)
        .into_par_iter()
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..l {
                let pose = AffinePose {
                    translation: Vec3::new(x0 + i as f64 * h, x0 + j as f64 * h, 0.0),
                    dilation: tau,
                    rotation: *sigma,
                };
                acc += disc.at(&body, &pose)?.powi(2);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let spatial = spatial_rows.iter().sum::<f64>() * h * h;

    let n = pts.len() as f64;
    let f = 1.0 / grid.side;
    let half = (l / 2) as i64;
    let spectral_rows = (-half + 1..half)
        .into_par_iter()
        .map(|ky| {
            let mut acc = 0.0;
            for kx in -half + 1..half {
                let xi = Vec3::new(kx as f64 * f, ky as f64 * f, 0.0);
                let s: Complex64 = pts.iter().map(|p| Complex64::from_polar(1.0, -2.0 * PI * xi.dot(p))).sum();
                let nu = s - mu.fourier(&xi)?.value() * n;
                acc += nu.norm_sqr() * posed_indicator_ft(&body, tau, sigma, &xi)?.norm_sqr();
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let spectral = spectral_rows.iter().sum::<f64>() * f * f;
    let gap = (spatial - spectral).abs() / spectral.abs().max(f64::MIN_POSITIVE);
    if gap > 0.10 {
        return Err(LabError::InsufficientResolution { gap });
    }
    Ok(BridgeValue { spatial, spectral, gap })
}
