//! The bump kernel `K = (ψ̂)²` with `K̂ = ψ∗ψ`, and its action on measures.
//!
//! `ψ(x) = c·exp(−1/(1 − |2x|²))` on `|x| < 1/2`, radial in `R^d`. The
//! constant makes `‖ψ‖₂ = 1`, so `K̂(0) = ‖ψ‖₂² = 1` and Cauchy–Schwarz
//! gives `0 ≤ K̂ ≤ 1`; then `K(x) ≤ (∫ψ)² ≤ |B(0,1/2)| < 1` as well. With
//! `∫ψ = 1` instead, `K̂(0) = ‖ψ‖₂² ≥ 1/|B(0,1/2)| > 1` for `d ∈ {2,3}`.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{AffinePose, Dim, Shape, Vec3};
use crate::measure::Evaluator;
use crate::quadrature::gauss_legendre_on;

/// Radial nodes of the cached `K̂ = ψ∗ψ` on `[0, 1]`.
pub const KHAT_NODES: usize = 1000;
/// `K(t)` is tabulated on `[0, K_RANGE]`; beyond, it is below the
/// certified decay bound and treated as zero.
pub const K_RANGE: f64 = 32.0;
const K_STEP: f64 = 1.0 / 64.0;
const RADIAL_NODES: usize = 256;

fn profile(r: f64) -> f64 {
    let q = 1.0 - 4.0 * r * r;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn sphere_area(dim: Dim) -> f64 {
    match dim {
        Dim::Two => 2.0 * PI,
        Dim::Three => 4.0 * PI,
    }
}

/// Numerical checks behind a [`BumpKernel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCertificate {
    /// `K̂(0)`, equal to `‖ψ‖₂² = 1`.
    pub khat_zero: f64,
    pub khat_min: f64,
    pub khat_max: f64,
    /// `K̂_M` at `|ξ| = M(1 + 10⁻⁶)`.
    pub khat_beyond: f64,
    /// `∫K`, which equals `K̂(0)` by Plancherel.
    pub k_integral: f64,
    /// `K(0) = (∫ψ)²`.
    pub k_zero: f64,
    /// `sup_{|x|≤1} K`.
    pub k_max_inner: f64,
    /// `sup_{|x|≥1} K(x)|x|^L` over the table.
    pub decay_constant: f64,
    pub l_decay: f64,
}

#[derive(Clone, Debug)]
pub struct BumpKernel {
    dim: Dim,
    m: f64,
    c_psi: f64,
    psi_integral: f64,
    khat: Vec<f64>,
    k: Vec<f64>,
    certificate: KernelCertificate,
}

fn interp_linear(table: &[f64], step: f64, t: f64) -> f64 {
    let x = t / step;
    let i = x.floor() as usize;
    if i + 1 >= table.len() {
        return *table.last().unwrap_or(&0.0);
    }
    let f = x - i as f64;
    table[i] * (1.0 - f) + table[i + 1] * f
}

fn interp_cubic(table: &[f64], step: f64, t: f64) -> f64 {
    let x = t / step;
    let i = x.floor() as usize;
    let n = table.len();
    if i + 2 >= n || i == 0 {
        return interp_linear(table, step, t);
    }
    let f = x - i as f64;
    let (p0, p1, p2, p3) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
    p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)))
}

impl BumpKernel {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.m
    }

    pub fn certificate(&self) -> &KernelCertificate {
        &self.certificate
    }

    /// `∫ψ` under the `‖ψ‖₂ = 1` normalization.
    pub fn psi_integral(&self) -> f64 {
        self.psi_integral
    }

    /// `ψ` at radius `r`.
    pub fn psi(&self, r: f64) -> f64 {
        self.c_psi * profile(r)
    }

    /// `K̂(s)` for `s = |ξ|`, zero for `s ≥ 1`.
    pub fn khat(&self, s: f64) -> f64 {
        if s >= 1.0 {
            0.0
        } else {
            interp_linear(&self.khat, 1.0 / (KHAT_NODES - 1) as f64, s.abs())
        }
    }

    /// `K̂_M(ξ) = K̂(ξ/M)`.
    pub fn khat_m(&self, xi: f64) -> f64 {
        self.khat(xi / self.m)
    }

    /// `K(t)` for `t = |x|`.
    pub fn k(&self, t: f64) -> f64 {
        if t >= K_RANGE {
            0.0
        } else {
            interp_cubic(&self.k, K_STEP, t.abs()).max(0.0)
        }
    }

    /// `K_M(x) = M^d K(M|x|)`.
    pub fn k_m(&self, r: f64) -> f64 {
        self.m.powi(self.dim.get() as i32) * self.k(self.m * r)
    }

    /// Same base kernel at another scale.
    pub fn rescaled(&self, m: f64) -> Result<Self> {
        if !(m >= 1.0 && m.is_finite()) {
            return invalid(format!("kernel scale M = {m} must be at least 1"));
        }
        Ok(BumpKernel { m, ..self.clone() })
    }

    /// `sup_{|x|≥1} K(x)|x|^L` over the tabulated range.
    pub fn decay_constant(&self, l: f64) -> f64 {
        self.k
            .iter()
            .enumerate()
            .map(|(i, v)| (i as f64 * K_STEP, v))
            .filter(|(t, _)| *t >= 1.0)
            .map(|(t, v)| v * t.powf(l))
            .fold(0.0, f64::max)
    }
}

fn psi_hat(dim: Dim, c: f64, t: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (rs, ws) = nodes;
    let s: f64 = rs
        .iter()
        .zip(ws)
        .map(|(&r, &w)| {
            let a = 2.0 * PI * t * r;
            let kernel = match dim {
                Dim::Two => 2.0 * PI * r * crate::bessel::j0(a),
                Dim::Three => 4.0 * PI * r * r * if a < 1e-8 { 1.0 } else { a.sin() / a },
            };
            w * profile(r) * kernel
        })
        .sum();
    c * s
}

/// `ψ∗ψ(s)` on the radial axis: in cylindrical coordinates around the
/// offset `s·e₁`, the integrand is `w(y)·ψ(|(x, y)|)·ψ(|(x − s, y)|)`
/// with `w = 2` in the plane and `w = 2πy` in space.
fn autocorrelation(dim: Dim, c: f64, s: f64, gx: &(Vec<f64>, Vec<f64>), gy: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (lo, hi) = (s - 0.5, 0.5);
    if hi <= lo {
        return 0.0;
    }
    let (hx, mx) = (0.5 * (hi - lo), 0.5 * (hi + lo));
    let mut acc = 0.0;
    for (&u, &wu) in gx.0.iter().zip(&gx.1) {
        let x = mx + hx * u;
        for (&y, &wy) in gy.0.iter().zip(&gy.1) {
            let w = match dim {
                Dim::Two => 2.0,
                Dim::Three => 2.0 * PI * y,
            };
            acc += wu * hx * wy * w * profile((x * x + y * y).sqrt()) * profile(((x - s).powi(2) + y * y).sqrt());
        }
    }
    c * c * acc
}

/// Builds and certifies `K_M` in dimension `dim`; `l_decay` is the
/// exponent of the certified tail bound `K(x) ≤ c_L|x|^{−L}` for `|x| ≥ 1`.
pub fn build_kernel(dim: Dim, m: f64, l_decay: f64) -> Result<BumpKernel> {
    if !(m >= 1.0 && m.is_finite()) {
        return invalid(format!("kernel scale M = {m} must be at least 1"));
    }
    if !(l_decay > 0.0 && l_decay.is_finite()) {
        return invalid("decay exponent must be positive");
    }
    let radial = gauss_legendre_on(RADIAL_NODES, 0.0, 0.5);
    let omega = sphere_area(dim);
    let d = dim.get() as i32;
    let norm2: f64 = radial.0.iter().zip(&radial.1).map(|(&r, &w)| w * profile(r).powi(2) * omega * r.powi(d - 1)).sum();
    let c = 1.0 / norm2.sqrt();
    let psi_integral = c * radial.0.iter().zip(&radial.1).map(|(&r, &w)| w * profile(r) * omega * r.powi(d - 1)).sum::<f64>();

    let gx = crate::quadrature::gauss_legendre(96);
    let gy = gauss_legendre_on(96, 0.0, 0.5);
    let khat: Vec<f64> = (0..KHAT_NODES)
        .into_par_iter()
        .map(|i| autocorrelation(dim, c, i as f64 / (KHAT_NODES - 1) as f64, &gx, &gy))
        .collect();

    let n_k = (K_RANGE / K_STEP).round() as usize + 1;
    let k: Vec<f64> = (0..n_k)
        .into_par_iter()
        .map(|i| psi_hat(dim, c, i as f64 * K_STEP, &radial).powi(2))
        .collect();

    // ∫K over R^d by composite Gauss–Legendre on unit panels of t.
    let panel = gauss_legendre_on(16, 0.0, 1.0);
    let k_integral: f64 = (0..K_RANGE as usize)
        .into_par_iter()
        .map(|p| {
            panel
                .0
                .iter()
                .zip(&panel.1)
                .map(|(&u, &w)| {
                    let t = p as f64 + u;
                    w * psi_hat(dim, c, t, &radial).powi(2) * omega * t.powi(d - 1)
                })
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();

    let mut kernel = BumpKernel {
        dim,
        m,
        c_psi: c,
        psi_integral,
        khat,
        k,
        certificate: KernelCertificate {
            khat_zero: 0.0,
            khat_min: 0.0,
            khat_max: 0.0,
            khat_beyond: 0.0,
            k_integral,
            k_zero: 0.0,
            k_max_inner: 0.0,
            decay_constant: 0.0,
            l_decay,
        },
    };
    let cert = KernelCertificate {
        khat_zero: kernel.khat[0],
        khat_min: kernel.khat.iter().copied().fold(f64::INFINITY, f64::min),
        khat_max: kernel.khat.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        khat_beyond: kernel.khat_m(m * (1.0 + 1e-6)),
        k_integral,
        k_zero: kernel.k[0],
        k_max_inner: kernel.k.iter().take((1.0 / K_STEP) as usize + 1).copied().fold(0.0, f64::max),
        decay_constant: kernel.decay_constant(l_decay),
        l_decay,
    };
    kernel.certificate = cert.clone();
    let fail = |msg: String| Err(LabError::KernelCertification(msg));
    if (cert.khat_zero - 1.0).abs() > 1e-9 {
        return fail(format!("K̂(0) = {} differs from ‖ψ‖₂² = 1", cert.khat_zero));
    }
    if cert.khat_min < -1e-12 || cert.khat_max > 1.0 + 1e-9 {
        return fail(format!("K̂ leaves [0, 1]: range [{}, {}]", cert.khat_min, cert.khat_max));
    }
    if cert.khat_beyond != 0.0 {
        return fail("K̂_M is nonzero beyond |ξ| = M".into());
    }
    if (cert.k_integral - cert.khat_zero).abs() > 1e-6 {
        return fail(format!("∫K = {} but K̂(0) = {}", cert.k_integral, cert.khat_zero));
    }
    if (cert.k_zero - psi_integral.powi(2)).abs() > 1e-9 || cert.k_max_inner > 1.0 {
        return fail(format!("K(0) = {} and sup_(|x|≤1) K = {}", cert.k_zero, cert.k_max_inner));
    }
    if !cert.decay_constant.is_finite() {
        return fail("tail constant is not finite".into());
    }
    Ok(kernel)
}

/// `max |K_M∗μ(z)|` over the sampled centers and its ratio to `M^{d−α}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmBound {
    pub m: f64,
    pub max_abs: f64,
    pub ratio: f64,
    pub argmax: [f64; 3],
    pub trials: usize,
}

/// Number of radial Stieltjes cells per unit of `t = M·r`.
const STIELTJES_PER_UNIT: f64 = 32.0;

/// `K_M∗μ(z) = ∫ K_M(z − x) dμ(x) = ∫₀^∞ M^d K(Mr) dF(r)` with
/// `F(r) = μ(B(z, r))` from exact ball evaluations (or the evaluator's
/// empirical fallback), summed as a midpoint Riemann–Stieltjes sum.
pub fn convolve_at(kernel: &BumpKernel, eval: &Evaluator, z: &Vec3) -> Result<f64> {
    let dim = eval.measure().dim();
    if dim != kernel.dim() {
        return Err(LabError::InvalidPose("kernel and measure dimensions differ".into()));
    }
    let ball = Shape::Ball { radius: 1.0, dim }.prepare()?;
    let m = kernel.scale();
    let n = (K_RANGE * STIELTJES_PER_UNIT) as usize;
    let dt = K_RANGE / n as f64;
    let mut prev = 0.0;
    let mut acc = 0.0;
    for i in 1..=n {
        let r = i as f64 * dt / m;
        let pose = AffinePose { translation: *z, dilation: r, rotation: crate::geometry::Rotation::identity(dim) };
        let f = eval.evaluate(&ball, &pose)?.value;
        acc += kernel.k((i as f64 - 0.5) * dt) * (f - prev);
        prev = f;
        if f >= 1.0 {
            break;
        }
    }
    Ok(m.powi(dim.get() as i32) * acc)
}

/// Largest `|K_M∗μ(z)|` over `trials` centers: draws from `μ`, half of
/// them pushed by a uniform offset in `B(0, 2/M)`.
pub fn km_convolution_bound(eval: &Evaluator, kernel: &BumpKernel, trials: usize, seed: u64) -> Result<KmBound> {
    if trials < 100 {
        return invalid(format!("trials = {trials} is below 100"));
    }
    let mu = eval.measure();
    let m = kernel.scale();
    let d = mu.dim().get();
    let centers = (0..trials)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut z = mu.sample_point(&mut rng)?;
            if rng.gen_bool(0.5) {
                let off = loop {
                    let mut v = Vec3::zeros();
                    for k in 0..d {
                        v[k] = rng.gen_range(-1.0..1.0);
                    }
                    if v.norm_squared() <= 1.0 {
                        break v;
                    }
                };
                z += off * (2.0 / m);
            }
            Ok(z)
        })
        .collect::<Result<Vec<Vec3>>>()?;
    let vals = centers.par_iter().map(|z| convolve_at(kernel, eval, z)).collect::<Result<Vec<f64>>>()?;
    let (mut best, mut arg) = (0.0f64, Vec3::zeros());
    for (v, z) in vals.iter().zip(&centers) {
        if v.abs() > best {
            best = v.abs();
            arg = *z;
        }
    }
    Ok(KmBound {
        m,
        max_abs: best,
        ratio: best / m.powf(d as f64 - mu.alpha()),
        argmax: [arg.x, arg.y, arg.z],
        trials,
    })
}
