use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Evaluation, PreparedMeasure};
use crate::error::{invalid, Result};
use crate::geometry::{AffinePose, Body, Vec3};

/// `M` equal-weight atoms drawn from a measure; a surrogate for pairs
/// without an exact evaluation path.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    atoms: Vec<Vec3>,
    source_seed: u64,
}

impl EmpiricalMeasure {
    pub fn from_measure(mu: &PreparedMeasure, atoms: usize, seed: u64) -> Result<Self> {
        if atoms == 0 {
            return invalid("an empirical measure needs at least one atom");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = (0..atoms).map(|_| mu.sample_point(&mut rng)).collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalMeasure { atoms, source_seed: seed })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec3] {
        &self.atoms
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }

    /// Atom fraction inside `x + τσΩ`, with the bound `2√(p(1−p)/M)`.
    pub fn evaluate(&self, body: &Body, pose: &AffinePose) -> Evaluation {
        let m = self.atoms.len() as f64;
        let hits = self.atoms.iter().filter(|a| body.contains(pose, a)).count() as f64;
        let p = hits / m;
        Evaluation { value: p, error: 2.0 * (p * (1.0 - p) / m).sqrt(), exact: false }
    }

    /// `M^{-1} Σ e^{-2πiξ·a}` with a `2/√M` error bound.
    pub fn fourier(&self, xi: &Vec3) -> (Complex64, f64) {
        let m = self.atoms.len() as f64;
        let s: Complex64 = self
            .atoms
            .iter()
            .map(|a| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi.dot(a)))
            .sum();
        (s / m, 2.0 / m.sqrt())
    }
}
