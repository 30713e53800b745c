use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball_indicator_ft;
use crate::error::{invalid, LabError, Result};
use crate::geometry::{Body, Dim, Geom, Rotation, Vec3};
use crate::measure::{polygon_ft, MeasureSpec};
use crate::qmc::ScrambledHalton;
use crate::stats::mean_se;

/// `χ̂_Ω(ξ)` by closed form: Bessel for balls, the edge formula for
/// polygons, the product formula for the rectangle union.
pub fn indicator_ft(body: &Body, xi: &Vec3) -> Result<Complex64> {
    match &body.geom {
        Geom::Ball { radius, dim } => Ok(Complex64::new(ball_indicator_ft(*radius, xi, *dim)?, 0.0)),
        Geom::Polygon(p) => Ok(polygon_ft(p.vertices(), &xi.xy()).0),
        Geom::Rects(r) => {
            let mu = MeasureSpec::lebesgue(body.shape().clone()).prepare()?;
            Ok(mu.fourier(xi)?.value() * r.area())
        }
        Geom::Curve(_) => Err(LabError::MissingFourier("indicator of a curve (zero area)".into())),
        Geom::HalfSpace { .. } => Err(LabError::UnboundedVolume),
    }
}

/// `χ̂_{τσΩ}(ξ) = τ^d χ̂_Ω(τσ⁻¹ξ)`.
pub fn posed_indicator_ft(body: &Body, tau: f64, sigma: &Rotation, xi: &Vec3) -> Result<Complex64> {
    let d = body.dim().get() as i32;
    Ok(indicator_ft(body, &(sigma.apply_inverse(xi) * tau))? * tau.powi(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEnergy {
    pub xi: f64,
    pub value: f64,
    pub stderr: f64,
}

/// `∫_γ^δ ∫_{SO(d)} |χ̂_{uσΩ}(ξ)|² dσ du` at `ξ = |ξ|e₁`, with
/// `|χ̂_{uσΩ}(ξ)|² = u^{2d}|χ̂_Ω(uσ⁻¹ξ)|²`, averaged over `n_rot`
/// scrambled-Halton draws of `(u, σ)`.
pub fn rotational_band_energy(
    body: &Body,
    xi_mag: f64,
    gamma: f64,
    delta: f64,
    n_rot: usize,
    seed: u64,
) -> Result<BandEnergy> {
    if !(gamma > 0.0 && gamma < delta) {
        return invalid(format!("band needs 0 < γ < δ, got {gamma}, {delta}"));
    }
    if !(xi_mag > 0.0 && xi_mag.is_finite()) || n_rot < 2 {
        return invalid("need |ξ| > 0 and at least two rotations");
    }
    let dim = body.dim();
    let d = dim.get() as i32;
    let h = ScrambledHalton::new(if dim == Dim::Two { 2 } else { 4 }, seed);
    let xi = Vec3::x() * xi_mag;
    let vals = (0..n_rot as u64)
        .into_par_iter()
        .map(|i| {
            let v = h.point(i);
            let u = gamma + (delta - gamma) * v[0];
            let sigma = Rotation::uniform(dim, &v[1..]);
            let z = indicator_ft(body, &(sigma.apply_inverse(&xi) * u))?;
            Ok(u.powi(2 * d) * z.norm_sqr() * (delta - gamma))
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = mean_se(&vals);
    Ok(BandEnergy { xi: xi_mag, value: m.mean, stderr: m.stderr })
}
