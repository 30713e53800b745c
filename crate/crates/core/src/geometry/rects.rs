//! The rectangle union with symmetric-difference exponent `β`.

use std::ops::Range;

use super::Vec2;
use crate::error::{LabError, Result};

/// Hard cap on the number of stored rectangles.
pub const MAX_RECTANGLES: u64 = 4_000_000;

#[derive(Clone, Debug)]
pub struct RectUnion {
    beta: f64,
    gamma: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    area: f64,
}

impl RectUnion {
    /// Rectangles `n = 1..=truncation`; by default the first `n` with
    /// `n^{-γ} < 1e-6`, capped at [`MAX_RECTANGLES`].
    pub fn new(beta: f64, truncation: Option<u64>) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(LabError::InvalidShape(format!("beta {beta} must lie in (0, 1)")));
        }
        let gamma = beta / (1.0 - beta);
        let t = match truncation {
            Some(0) => return Err(LabError::InvalidShape("truncation must be positive".into())),
            Some(t) => t,
            None => (1e6f64.powf(1.0 / gamma).floor() as u64 + 1).min(MAX_RECTANGLES),
        };
        if t > MAX_RECTANGLES {
            return Err(LabError::InvalidShape(format!("truncation {t} exceeds {MAX_RECTANGLES}")));
        }
        let mut left = Vec::with_capacity(t as usize);
        let mut right = Vec::with_capacity(t as usize);
        for n in 1..=t {
            let r = (n as f64).powf(-gamma);
            let z = r - ((n + 1) as f64).powf(-gamma);
            right.push(r);
            left.push(r - z / 3.0);
        }
        let area = (0..t as usize).rev().map(|i| right[i] - left[i]).sum();
        Ok(Self { beta, gamma, left, right, area })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// `Σ z_n / 3` over the stored rectangles.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Area of the omitted rectangles, `(T+1)^{-γ}/3`; stored plus tail is exactly 1/3.
    pub fn tail_area(&self) -> f64 {
        ((self.len() + 1) as f64).powf(-self.gamma) / 3.0
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        (Vec2::new(*self.left.last().unwrap(), 0.0), Vec2::new(1.0, 1.0))
    }

    pub fn bounding_radius(&self) -> f64 {
        2f64.sqrt()
    }

    /// `(left, right)` of rectangle `i` (zero-based, rectangle `n = i + 1`).
    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.left[i], self.right[i])
    }

    /// Indices of rectangles meeting the slab `x0 ≤ x ≤ x1`.
    pub fn indices_in(&self, x0: f64, x1: f64) -> Range<usize> {
        let start = self.left.partition_point(|&l| l > x1);
        let end = self.right.partition_point(|&r| r >= x0);
        start..end.max(start)
    }

    pub fn contains(&self, q: &Vec2) -> bool {
        if !(0.0..=1.0).contains(&q.y) {
            return false;
        }
        let i = self.left.partition_point(|&l| l > q.x);
        i < self.left.len() && q.x <= self.right[i]
    }

    pub fn boundary_within(&self, q: &Vec2, t: f64) -> bool {
        if q.y < -t || q.y > 1.0 + t {
            return false;
        }
        for i in self.indices_in(q.x - t, q.x + t) {
            let (l, r) = (self.left[i], self.right[i]);
            let d = if q.x >= l && q.x <= r && q.y >= 0.0 && q.y <= 1.0 {
                (q.x - l).min(r - q.x).min(q.y).min(1.0 - q.y)
            } else {
                let dx = (l - q.x).max(q.x - r).max(0.0);
                let dy = (-q.y).max(q.y - 1.0).max(0.0);
                dx.hypot(dy)
            };
            if d <= t {
                return true;
            }
        }
        false
    }
}
