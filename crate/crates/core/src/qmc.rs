//! Scrambled Halton sequences.
//!
//! Each coordinate uses a distinct prime base; digits are passed through a
//! random permutation drawn per (coordinate, digit position) from a seeded
//! ChaCha stream, so the sequence is a pure function of the seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Clone, Debug)]
pub struct ScrambledHalton {
    dims: usize,
    // perms[d][k] is the digit permutation at position k for coordinate d.
    perms: Vec<Vec<Vec<u32>>>,
}

impl ScrambledHalton {
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims >= 1 && dims <= PRIMES.len(), "at most {} coordinates", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let perms = PRIMES[..dims]
            .iter()
            .map(|&b| {
                let digits = (53.0 * std::f64::consts::LN_2 / (b as f64).ln()).ceil() as usize;
                (0..digits)
                    .map(|_| {
                        let mut p: Vec<u32> = (0..b).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            })
            .collect();
        Self { dims, perms }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Coordinate `d` of point `index`, in [0, 1).
    pub fn coord(&self, index: u64, d: usize) -> f64 {
        let b = PRIMES[d] as u64;
        let inv = 1.0 / b as f64;
        let mut n = index;
        let mut scale = inv;
        let mut acc = 0.0;
        for perm in &self.perms[d] {
            let digit = (n % b) as usize;
            n /= b;
            acc += perm[digit] as f64 * scale;
            scale *= inv;
        }
        acc.min(1.0 - f64::EPSILON)
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        (0..self.dims).map(|d| self.coord(index, d)).collect()
    }
}
