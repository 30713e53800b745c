//! Numerical laboratory for geometric discrepancy.
//!
//! Point sets are compared against probability measures with a growth
//! exponent `α` over families of dilated, rotated and translated bodies
//! (and over half-spaces). The crate provides the geometry of those bodies,
//! the measures, point generators, the discrepancy functionals, the Fourier
//! side (indicator transforms, shell energies, the bump kernel, exponential
//! sums) and an experiment driver that fits scaling exponents.

pub mod bessel;
pub mod discrepancy;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod measure;
pub mod pointset;
pub mod qmc;
pub mod quadrature;
pub mod spectral;
pub mod stats;

pub use error::{LabError, Result};
