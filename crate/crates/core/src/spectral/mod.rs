//! The Fourier side.

mod ball;
mod cassels;
mod grid;
mod kernel;
mod rotational;

pub use ball::ball_indicator_ft;
pub use cassels::{cassels_montgomery, plancherel_bridge, BridgeGrid, BridgeValue, CasselsQuad, CasselsValue};
pub use grid::{dyadic_shells, shell_energy, write_rows_csv, GridHeader, ShellBand, ShellRow, SpectralGrid, SUPERSAMPLE};
pub use kernel::{build_kernel, convolve_at, km_convolution_bound, BumpKernel, KernelCertificate, KmBound, KHAT_NODES, K_RANGE};
pub use rotational::{indicator_ft, posed_indicator_ft, rotational_band_energy, BandEnergy};

/// `sup u^{3/2}|E_d(u)|` over `u ∈ [lo, hi]`, where `E_d` is the remainder
/// of `J_{d/2}(2πu)` after its leading cosine term.
pub fn bessel_asymptotic_check(d: usize, lo: f64, hi: f64) -> crate::Result<f64> {
    if !(1.0..=1e3).contains(&lo) || !(lo..=1e3).contains(&hi) || !(d == 2 || d == 3) {
        return Err(crate::LabError::InvalidArgument(format!("need d ∈ {{2,3}} and 1 ≤ {lo} ≤ {hi} ≤ 1000")));
    }
    Ok(crate::bessel::asymptotic_check(d, lo, hi, 1e-3))
}
