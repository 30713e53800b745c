//! Bessel functions of the first kind for integer and half-integer order.
//!
//! Small arguments use the power series, large arguments the Hankel
//! asymptotic expansion summed up to its smallest term. For half-integer
//! orders the expansion terminates and is exact.

use std::f64::consts::PI;

const CROSSOVER: f64 = 14.0;

fn gamma_half_integer(m: u32) -> f64 {
    // Γ(m/2) for m ≥ 1.
    if m.is_multiple_of(2) {
        (1..m / 2).map(|k| k as f64).product()
    } else {
        (0..(m - 1) / 2).map(|j| j as f64 + 0.5).product::<f64>() * PI.sqrt()
    }
}

fn check_order(nu: f64) -> u32 {
    let two = 2.0 * nu;
    assert!(
        nu >= 0.0 && (two - two.round()).abs() < 1e-12,
        "order must be a non-negative multiple of 1/2"
    );
    two.round() as u32
}

fn series(nu: f64, x: f64) -> f64 {
    let two_nu = check_order(nu);
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma_half_integer(two_nu + 2);
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k as f64 + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        t *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if t == 0.0 {
            break;
        }
        if t.abs() > prev {
            break;
        }
        prev = t.abs();
        // Terms alternate between Q (odd k) and P (even k) with signs
        // (+, -, -, +, +, -, -, ...) relative to P - Q.
        match k % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_ν(x)` for `ν ∈ {0, 1/2, 1, 3/2, ...}` and `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    check_order(nu);
    assert!(x >= 0.0 && x.is_finite(), "argument must be finite and non-negative");
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let exact_hankel = (2.0 * nu) as u32 % 2 == 1;
    if x < CROSSOVER && !(exact_hankel && x > 2.0) {
        series(nu, x)
    } else {
        hankel(nu, x)
    }
}

pub fn j0(x: f64) -> f64 {
    bessel_j(0.0, x.abs())
}

pub fn j1(x: f64) -> f64 {
    x.signum() * bessel_j(1.0, x.abs())
}

/// Remainder of the one-term asymptotic `J_{d/2}(2πu) ≈ π^{-1} u^{-1/2} cos(2πu − (d+1)π/4)`.
pub fn asymptotic_remainder(d: usize, u: f64) -> f64 {
    let nu = d as f64 / 2.0;
    bessel_j(nu, 2.0 * PI * u)
        - (2.0 * PI * u - (d as f64 + 1.0) * PI / 4.0).cos() / (PI * u.sqrt())
}

/// Supremum of `u^{3/2}|E_d(u)|` over the nodes `k·step` lying in `[lo, hi]`.
///
/// Nodes sit on a fixed lattice, so shrinking the range can only lower the value.
pub fn asymptotic_check(d: usize, lo: f64, hi: f64, step: f64) -> f64 {
    assert!(lo >= 1.0 && hi <= 1e3 && lo < hi && step > 0.0);
    let k0 = (lo / step).ceil() as u64;
    let k1 = (hi / step).floor() as u64;
    (k0..=k1)
        .map(|k| {
            let u = k as f64 * step;
            u.powf(1.5) * asymptotic_remainder(d, u).abs()
        })
        .fold(0.0, f64::max)
}
