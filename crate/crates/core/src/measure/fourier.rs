use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MeasureSpec, PreparedMap, PreparedMeasure, Repr};
use crate::bessel::j0;
use crate::error::{invalid, LabError, Result};
use crate::geometry::{Geom, Vec2, Vec3};
use crate::quadrature::gauss_legendre;
use crate::spectral::ball_indicator_ft;

/// Largest `|ξ|` accepted by [`PreparedMeasure::fourier`].
pub const DEFAULT_CUTOFF: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub re: f64,
    pub im: f64,
    pub error: f64,
}

impl FourierValue {
    fn new(z: Complex64, error: f64) -> Self {
        FourierValue { re: z.re, im: z.im, error }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `(e^z − 1)/z`, the mean of `e^{zt}` over `t ∈ [0,1]`.
fn mean_exp(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

fn phase(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * t)
}

/// `∫_P e^{-2πiξ·x} dx` for a simple counterclockwise polygon, via the
/// divergence theorem on its edges; small frequencies switch to a fan
/// quadrature that avoids cancellation. Returns the value and a rounding bound.
pub fn polygon_ft(v: &[Vec2], xi: &Vec2) -> (Complex64, f64) {
    let n = v.len();
    let (lo, hi) = v.iter().fold((v[0], v[0]), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    let diam = (hi - lo).norm();
    let k2 = xi.norm_squared();
    if k2.sqrt() * diam < 1e-2 {
        let c = v[0];
        let tris: Vec<[Vec2; 3]> = (1..n - 1).map(|i| [c, v[i], v[i + 1]]).collect();
        let (z, _) = triangles_ft(&tris, xi, 6);
        return (z, 1e-14 * z.norm().max(diam * diam));
    }
    let mut s = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for i in 0..n {
        let p = v[i];
        let d = v[(i + 1) % n] - p;
        let flux = xi.x * d.y - xi.y * d.x;
        if flux == 0.0 {
            continue;
        }
        let t = phase(xi.dot(&p)) * mean_exp(Complex64::new(0.0, -2.0 * PI * xi.dot(&d))) * flux;
        scale += flux.abs();
        s += t;
    }
    let f = Complex64::new(0.0, 1.0 / (2.0 * PI * k2));
    (s * f, 8.0 * f64::EPSILON * (n as f64).sqrt() * scale / (2.0 * PI * k2))
}

// Signed triangles; collapsed tensor Gauss–Legendre of the given order.
fn triangles_ft(tris: &[[Vec2; 3]], xi: &Vec2, order: usize) -> (Complex64, usize) {
    let (x, w) = gauss_legendre(order);
    let nodes: Vec<(f64, f64)> = x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
    let mut s = Complex64::new(0.0, 0.0);
    for [a, b, c] in tris {
        let (e1, e2) = (b - a, c - b);
        let det = e1.x * e2.y - e1.y * e2.x;
        let mut t = Complex64::new(0.0, 0.0);
        for &(u, wu) in &nodes {
            let mut row = Complex64::new(0.0, 0.0);
            for &(v, wv) in &nodes {
                let p = a + e1 * u + e2 * (u * v);
                row += phase(xi.dot(&p)) * wv;
            }
            t += row * (u * wu);
        }
        s += t * det;
    }
    (s, tris.len() * order * order)
}

/// Quadrature transform `∫ e^{-2πiξ·x} dx` over a union of (signed)
/// triangles. The error estimate is the change from order `order − 4`.
pub fn fourier_by_triangles(tris: &[[Vec2; 3]], xi: &Vec2, order: usize) -> Result<(Complex64, f64)> {
    if order < 6 {
        return invalid("triangle quadrature needs order at least 6");
    }
    let (hi, _) = triangles_ft(tris, xi, order);
    let (lo, _) = triangles_ft(tris, xi, order - 4);
    Ok((hi, (hi - lo).norm()))
}

impl PreparedMeasure {
    /// `μ̂(ξ) = ∫ e^{-2πiξ·x} dμ(x)` for `|ξ| ≤` [`DEFAULT_CUTOFF`].
    pub fn fourier(&self, xi: &Vec3) -> Result<FourierValue> {
        self.fourier_with_cutoff(xi, DEFAULT_CUTOFF)
    }

    pub fn fourier_with_cutoff(&self, xi: &Vec3, cutoff: f64) -> Result<FourierValue> {
        let norm = xi.norm();
        if !norm.is_finite() || norm > cutoff {
            return Err(LabError::CutoffExceeded { norm, cutoff });
        }
        if norm == 0.0 {
            return Ok(FourierValue::new(Complex64::new(1.0, 0.0), 0.0));
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(match &self.repr {
            Repr::Lebesgue { body, volume } => match &body.geom {
                Geom::Ball { radius, dim } => {
                    let v = ball_indicator_ft(*radius, xi, *dim)? / volume;
                    FourierValue::new(one * v, 1e-12 * v.abs().max(1e-300))
                }
                Geom::Polygon(p) => {
                    let (z, e) = polygon_ft(p.vertices(), &xi.xy());
                    FourierValue::new(z / *volume, e / volume)
                }
                Geom::Rects(r) => {
                    let ey = mean_exp(Complex64::new(0.0, -2.0 * PI * xi.y));
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in (0..r.len()).rev() {
                        let (l, rr) = r.interval(i);
                        s += phase(xi.x * l) * mean_exp(Complex64::new(0.0, -2.0 * PI * xi.x * (rr - l))) * (rr - l);
                    }
                    FourierValue::new(s * ey / *volume, 4.0 * f64::EPSILON * (r.len() as f64).sqrt())
                }
                _ => return Err(LabError::MissingFourier(self.spec.id())),
            },
            Repr::Curve(c) => {
                let total = c.total_length();
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..c.num_segments() {
                    let (a, b) = c.segment(i);
                    let d = b - a;
                    s += phase(xi.xy().dot(&a)) * mean_exp(Complex64::new(0.0, -2.0 * PI * xi.xy().dot(&d))) * d.norm();
                }
                FourierValue::new(s / total, 4.0 * f64::EPSILON * (c.num_segments() as f64).sqrt())
            }
            Repr::Circle { radius } => FourierValue::new(one * j0(2.0 * PI * radius * xi.xy().norm()), 1e-14),
            Repr::Sphere { radius } => {
                let t = 2.0 * PI * radius * norm;
                FourierValue::new(one * (t.sin() / t), 1e-15)
            }
            Repr::Push { base, map } => match map {
                PreparedMap::Affine { a, b, .. } => {
                    let inner = base.fourier_with_cutoff(&(a.transpose() * xi), cutoff)?;
                    FourierValue::new(phase(xi.dot(b)) * inner.value(), inner.error)
                }
                PreparedMap::Radial { .. } => return Err(LabError::MissingFourier(self.spec.id())),
            },
        })
    }
}

/// `μ̂(ξ)` for a measure description.
pub fn fourier_coefficient(mu: &MeasureSpec, xi: &Vec3, cutoff: f64) -> Result<FourierValue> {
    mu.prepare()?.fourier_with_cutoff(xi, cutoff)
}
