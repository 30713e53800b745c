use std::f64::consts::PI;

use crate::bessel::bessel_j;
use crate::error::{invalid, Result};
use crate::geometry::{Dim, Vec3};

/// `χ̂_{rB}(ξ) = r^{d/2} |ξ|^{-d/2} J_{d/2}(2πr|ξ|)`, with the volume at `ξ = 0`.
pub fn ball_indicator_ft(r: f64, xi: &Vec3, dim: Dim) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return invalid(format!("ball radius {r} must be positive"));
    }
    let k = match dim {
        Dim::Two => xi.xy().norm(),
        Dim::Three => xi.norm(),
    };
    let d = dim.get() as f64;
    if k * r < 1e-8 {
        return Ok(dim.unit_ball_volume() * r.powf(d));
    }
    Ok((r / k).powf(d / 2.0) * bessel_j(d / 2.0, 2.0 * PI * r * k))
}
