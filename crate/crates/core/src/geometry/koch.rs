//! Koch snowflake polygons, their triangle forests, and per-level caches.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{LabError, Result};

use super::{IndexedPolygon, Polyline, Vec2};

/// Largest level accepted by [`koch_polygon`].
pub const MAX_KOCH_LEVEL: u32 = 12;
/// Largest level for which membership indices and curve trees are built.
pub const MAX_INDEXED_LEVEL: u32 = 10;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn base_triangle() -> Vec<Vec2> {
    vec![
        Vec2::new(-0.5, -SQRT3 / 6.0),
        Vec2::new(0.5, -SQRT3 / 6.0),
        Vec2::new(0.0, SQRT3 / 3.0),
    ]
}

// Replace the middle third of every edge by an outward bump.
fn refine(v: &[Vec2], pendants: Option<&mut Vec<[Vec2; 3]>>) -> Vec<Vec2> {
    let n = v.len();
    let (s, c) = (-SQRT3 / 2.0, 0.5);
    let mut out = Vec::with_capacity(4 * n);
    let mut tri = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let w = (b - a) / 3.0;
        let m1 = a + w;
        let m2 = a + w * 2.0;
        let apex = m1 + Vec2::new(c * w.x - s * w.y, s * w.x + c * w.y);
        out.extend_from_slice(&[a, m1, apex, m2]);
        tri.push([m2, m1, apex]);
    }
    if let Some(p) = pendants {
        p.extend(tri);
    }
    out
}

/// Counterclockwise vertex list of `K_n`: `3·4^n` edges of length `3^{-n}`,
/// base triangle of side 1 with a horizontal bottom side, centroid at the origin.
pub fn koch_polygon(level: u32) -> Result<Vec<Vec2>> {
    if level > MAX_KOCH_LEVEL {
        return Err(LabError::ResourceLimit { level, max: MAX_KOCH_LEVEL });
    }
    let mut v = base_triangle();
    for _ in 0..level {
        v = refine(&v, None);
    }
    Ok(v)
}

/// The base triangle followed by every pendant triangle added up to level `n`;
/// the triangles tile `K_n`. All are counterclockwise.
pub fn triangle_forest(level: u32) -> Result<Vec<[Vec2; 3]>> {
    if level > MAX_INDEXED_LEVEL {
        return Err(LabError::ResourceLimit { level, max: MAX_INDEXED_LEVEL });
    }
    let b = base_triangle();
    let mut forest = vec![[b[0], b[1], b[2]]];
    let mut v = b;
    for _ in 0..level {
        v = refine(&v, Some(&mut forest));
    }
    Ok(forest)
}

/// `|F_n| = (3√3/20)(4/9)^n`, the area still missing from `K_n`.
pub fn tail_area(level: u32) -> f64 {
    3.0 * SQRT3 / 20.0 * (4.0f64 / 9.0).powi(level as i32)
}

/// `area(K_n) = 2√3/5 − |F_n|`.
pub fn region_area(level: u32) -> f64 {
    2.0 * SQRT3 / 5.0 - tail_area(level)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendantLevel {
    pub k: u32,
    pub count: f64,
    pub side: f64,
}

/// `Ω = K_n ∪ F_n`, with `F_n` recorded as its pendant-triangle levels.
#[derive(Clone, Debug)]
pub struct SnowflakeDecomposition {
    pub level: u32,
    pub polygon: Vec<Vec2>,
    pub pendants: Vec<PendantLevel>,
}

impl SnowflakeDecomposition {
    /// Stores pendant levels `k = n, …, n + depth − 1`.
    pub fn new(level: u32, depth: u32) -> Result<Self> {
        let polygon = koch_polygon(level)?;
        let pendants = (level..level + depth)
            .map(|k| PendantLevel {
                k,
                count: 3.0 * 4f64.powi(k as i32),
                side: 3f64.powi(-(k as i32) - 1),
            })
            .collect();
        Ok(Self { level, polygon, pendants })
    }

    /// `|F_n|` summed from the stored triangles, smallest terms first.
    pub fn f_area(&self) -> f64 {
        self.pendants.iter().rev().map(|p| p.count * SQRT3 / 4.0 * p.side * p.side).sum()
    }
}

type Cache<T> = OnceLock<Mutex<HashMap<u32, Arc<T>>>>;

fn cached<T>(cache: &'static Cache<T>, level: u32, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
    if level > MAX_INDEXED_LEVEL {
        return Err(LabError::ResourceLimit { level, max: MAX_INDEXED_LEVEL });
    }
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(v) = guard.get(&level) {
        return Ok(v.clone());
    }
    let v = Arc::new(build()?);
    guard.insert(level, v.clone());
    Ok(v)
}

static REGIONS: Cache<IndexedPolygon> = OnceLock::new();
static CURVES: Cache<Polyline> = OnceLock::new();
static FORESTS: Cache<Vec<[Vec2; 3]>> = OnceLock::new();

pub(crate) fn region(level: u32) -> Result<Arc<IndexedPolygon>> {
    cached(&REGIONS, level, || IndexedPolygon::new(koch_polygon(level)?))
}

pub(crate) fn curve(level: u32) -> Result<Arc<Polyline>> {
    cached(&CURVES, level, || Polyline::closed(koch_polygon(level)?))
}

pub(crate) fn forest(level: u32) -> Result<Arc<Vec<[Vec2; 3]>>> {
    cached(&FORESTS, level, || triangle_forest(level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;

    fn edge_lengths(v: &[Vec2]) -> impl Iterator<Item = f64> + '_ {
        (0..v.len()).map(move |i| (v[(i + 1) % v.len()] - v[i]).norm())
    }

    #[test]
    fn edge_counts_and_lengths() {
        for n in 0..=6u32 {
            let v = koch_polygon(n).unwrap();
            assert_eq!(v.len(), 3 * 4usize.pow(n));
            let l = 3f64.powi(-(n as i32));
            assert!(edge_lengths(&v).all(|e| (e - l).abs() < 1e-12));
            let total: f64 = edge_lengths(&v).sum();
            assert!((total - 3.0 * (4.0f64 / 3.0).powi(n as i32)).abs() < 1e-10);
        }
        assert!(matches!(koch_polygon(13), Err(LabError::ResourceLimit { .. })));
    }

    #[test]
    fn base_triangle_is_centered_with_horizontal_bottom() {
        let v = koch_polygon(0).unwrap();
        assert_eq!(v[0].y, v[1].y);
        let c = (v[0] + v[1] + v[2]) / 3.0;
        assert!(c.norm() < 1e-16);
        assert!(polygon_area(&v) > 0.0);
    }

    #[test]
    fn refinement_keeps_old_vertices_and_bumps_outward() {
        let a = koch_polygon(2).unwrap();
        let b = koch_polygon(3).unwrap();
        for (i, p) in a.iter().enumerate() {
            assert!((b[4 * i] - p).norm() < 1e-15);
        }
        // Each refinement adds area, so every bump points outward.
        assert!(polygon_area(&b) > polygon_area(&a));
    }

    #[test]
    fn areas_match_closed_form_and_increments() {
        for n in 0..=8u32 {
            let v = koch_polygon(n).unwrap();
            assert!((polygon_area(&v) - region_area(n)).abs() < 1e-12, "n={n}");
        }
        for n in 0..8u32 {
            let inc = 3.0 * 4f64.powi(n as i32) * (SQRT3 / 4.0) * 9f64.powi(-(n as i32) - 1);
            assert!((region_area(n + 1) - region_area(n) - inc).abs() < 1e-12);
            let pa = polygon_area(&koch_polygon(n + 1).unwrap()) - polygon_area(&koch_polygon(n).unwrap());
            assert!((pa - inc).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_tail_matches_geometric_series() {
        for n in 0..=6u32 {
            let d = SnowflakeDecomposition::new(n, 60).unwrap();
            assert!((d.f_area() - tail_area(n)).abs() < 1e-12);
        }
        // Limit area: direct summation of every triangle area from level 0.
        let d = SnowflakeDecomposition::new(0, 80).unwrap();
        assert!((SQRT3 / 4.0 + d.f_area() - 2.0 * SQRT3 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn forest_tiles_the_polygon() {
        for n in 0..=5u32 {
            let f = triangle_forest(n).unwrap();
            assert_eq!(f.len(), 4usize.pow(n));
            let s: f64 = f.iter().map(|t| polygon_area(&t[..])).sum();
            assert!(f.iter().all(|t| polygon_area(&t[..]) > 0.0));
            assert!((s - region_area(n)).abs() < 1e-13);
        }
    }

    #[test]
    fn centroid_of_base_triangle_is_inside_level_four() {
        let k = region(4).unwrap();
        assert!(k.contains(&Vec2::zeros()));
        assert!(!k.contains(&Vec2::new(0.7, 0.0)));
    }
}
