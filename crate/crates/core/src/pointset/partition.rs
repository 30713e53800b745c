use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Generator, PointSet};
use crate::error::{invalid, LabError, Result};
use crate::geometry::{clip_convex, koch, polygon_area, polygon_centroid, Dim, Geom, Polyline, Shape, Vec2, Vec3};
use crate::measure::{to3, MeasureKind, PreparedMeasure};

#[derive(Clone, Debug)]
enum Region {
    /// Union of convex counterclockwise pieces.
    Pieces(Vec<Vec<Vec2>>),
    /// `{r0 ≤ |x| ≤ r1, t0 ≤ arg x ≤ t1}`.
    Sector { r0: f64, r1: f64, t0: f64, t1: f64 },
    Arc { radius: f64, t0: f64, t1: f64 },
    /// Arclength block of a curve, as its own vertex chain.
    Block(Vec<Vec2>),
    /// `{z0 ≤ z ≤ z1, p0 ≤ φ ≤ p1}` on the sphere, `z` in units of the radius.
    Zone { radius: f64, z0: f64, z1: f64, p0: f64, p1: f64 },
}

/// One partition cell with its measure, diameter and representative point.
#[derive(Clone, Debug)]
pub struct Cell {
    pub measure: f64,
    pub diameter: f64,
    pub representative: Vec3,
    region: Region,
}

const TOL: f64 = 1e-12;

fn angle_in(t: f64, t0: f64, t1: f64) -> bool {
    if t1 - t0 >= 2.0 * PI - TOL {
        return true;
    }
    let d = (t - t0).rem_euclid(2.0 * PI);
    d <= t1 - t0 + TOL || d >= 2.0 * PI - TOL
}

fn in_convex(v: &[Vec2], p: &Vec2) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let e = b - a;
        e.x * (p.y - a.y) - e.y * (p.x - a.x) >= -TOL * e.norm()
    })
}

fn seg_dist(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * t)).norm()
}

impl Cell {
    /// Membership of `p` in the cell, with a `1e-12` tolerance on its boundary.
    pub fn contains(&self, p: &Vec3) -> bool {
        match &self.region {
            Region::Pieces(ps) => ps.iter().any(|v| in_convex(v, &p.xy())),
            Region::Sector { r0, r1, t0, t1 } => {
                let r = p.xy().norm();
                r >= r0 - TOL && r <= r1 + TOL && (r < TOL || angle_in(p.y.atan2(p.x), *t0, *t1))
            }
            Region::Arc { radius, t0, t1 } => {
                (p.xy().norm() - radius).abs() <= TOL && angle_in(p.y.atan2(p.x), *t0, *t1)
            }
            Region::Block(v) => v.windows(2).any(|w| seg_dist(&p.xy(), &w[0], &w[1]) <= TOL),
            Region::Zone { radius, z0, z1, p0, p1 } => {
                let z = p.z / radius;
                (p.norm() - radius).abs() <= TOL
                    && z >= z0 - TOL
                    && z <= z1 + TOL
                    && (p.xy().norm() < TOL || angle_in(p.y.atan2(p.x), *p0, *p1))
            }
        }
    }

    /// A draw from the measure restricted to the cell.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec3 {
        match &self.region {
            Region::Pieces(ps) => {
                let tris: Vec<(f64, Vec2, Vec2, Vec2)> = ps
                    .iter()
                    .flat_map(|v| (1..v.len() - 1).map(move |i| (v[0], v[i], v[i + 1])))
                    .map(|(a, b, c)| (polygon_area(&[a, b, c]).max(0.0), a, b, c))
                    .collect();
                let total: f64 = tris.iter().map(|t| t.0).sum();
                let mut u = rng.gen::<f64>() * total;
                let mut pick = tris[tris.len() - 1];
                for t in &tris {
                    if u < t.0 {
                        pick = *t;
                        break;
                    }
                    u -= t.0;
                }
                let (mut s, mut t) = (rng.gen::<f64>(), rng.gen::<f64>());
                if s + t > 1.0 {
                    s = 1.0 - s;
                    t = 1.0 - t;
                }
                to3(pick.1 + (pick.2 - pick.1) * s + (pick.3 - pick.1) * t)
            }
            Region::Sector { r0, r1, t0, t1 } => {
                let r = (r0 * r0 + rng.gen::<f64>() * (r1 * r1 - r0 * r0)).sqrt();
                let t = t0 + rng.gen::<f64>() * (t1 - t0);
                Vec3::new(r * t.cos(), r * t.sin(), 0.0)
            }
            Region::Arc { radius, t0, t1 } => {
                let t = t0 + rng.gen::<f64>() * (t1 - t0);
                Vec3::new(radius * t.cos(), radius * t.sin(), 0.0)
            }
            Region::Block(v) => {
                let lens: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
                let mut u = rng.gen::<f64>() * lens.iter().sum::<f64>();
                for (i, l) in lens.iter().enumerate() {
                    if u <= *l || i + 1 == lens.len() {
                        let t = if *l > 0.0 { (u / l).min(1.0) } else { 0.0 };
                        return to3(v[i] + (v[i + 1] - v[i]) * t);
                    }
                    u -= l;
                }
                to3(v[0])
            }
            Region::Zone { radius, z0, z1, p0, p1 } => {
                let z = z0 + rng.gen::<f64>() * (z1 - z0);
                let ph = p0 + rng.gen::<f64>() * (p1 - p0);
                zone_point(*radius, z, ph)
            }
        }
    }
}

fn zone_point(radius: f64, z: f64, phi: f64) -> Vec3 {
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(radius * s * phi.cos(), radius * s * phi.sin(), radius * z)
}

/// Cells of measure `1/N` covering the support.
#[derive(Clone, Debug)]
pub struct EqualMeasurePartition {
    pub cells: Vec<Cell>,
    /// Exponent `a` in the diameter law `diam ≤ C·N^{-1/a}`.
    pub alpha_geom: f64,
    pub max_diameter: f64,
    /// `C = max diam · N^{1/a}`.
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PartitionOptions {
    /// Replace each centroid with a draw from `μ` restricted to its cell.
    pub jitter: bool,
}

fn hull_diameter(pts: &[Vec2]) -> f64 {
    let mut p: Vec<Vec2> = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return if p.len() == 2 { (p[1] - p[0]).norm() } else { 0.0 };
    }
    let turn = |o: &Vec2, a: &Vec2, b: &Vec2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut h: Vec<Vec2> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for q in iter {
            while h.len() >= start + 2 && turn(&h[h.len() - 2], &h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(*q);
        }
        h.pop();
    }
    let mut d = 0.0f64;
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            d = d.max((h[i] - h[j]).norm());
        }
    }
    d
}

fn sampled_diameter(pts: impl Iterator<Item = Vec3>) -> f64 {
    let p: Vec<Vec3> = pts.collect();
    let mut d = 0.0f64;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.max((p[i] - p[j]).norm());
        }
    }
    d
}

fn pieces_cell(pieces: Vec<Vec<Vec2>>, total: f64) -> Cell {
    let areas: Vec<f64> = pieces.iter().map(|v| polygon_area(v)).collect();
    let a: f64 = areas.iter().sum();
    let mut c = Vec2::zeros();
    for (v, w) in pieces.iter().zip(&areas) {
        c += polygon_centroid(v) * *w;
    }
    let mut rep = c / a;
    if !pieces.iter().any(|v| in_convex(v, &rep)) {
        let big = (0..pieces.len()).max_by(|&i, &j| areas[i].total_cmp(&areas[j])).unwrap_or(0);
        rep = polygon_centroid(&pieces[big]);
    }
    let all: Vec<Vec2> = pieces.iter().flatten().copied().collect();
    Cell { measure: a / total, diameter: hull_diameter(&all), representative: to3(rep), region: Region::Pieces(pieces) }
}

fn rect(lo: Vec2, hi: Vec2) -> Vec<Vec2> {
    vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)]
}

fn grid_cells(lo: Vec2, hi: Vec2, n: usize) -> Vec<Cell> {
    let k = (n as f64).sqrt().ceil() as usize;
    let ext = hi - lo;
    let total = ext.x * ext.y;
    let mut cells = Vec::with_capacity(n);
    let mut done = 0usize;
    for j in 0..k {
        let next = (j + 1) * n / k;
        let m = next - done;
        let (y0, y1) = (lo.y + ext.y * done as f64 / n as f64, lo.y + ext.y * next as f64 / n as f64);
        for i in 0..m {
            let x0 = lo.x + ext.x * i as f64 / m as f64;
            let x1 = lo.x + ext.x * (i + 1) as f64 / m as f64;
            cells.push(pieces_cell(vec![rect(Vec2::new(x0, y0), Vec2::new(x1, y1))], total));
        }
        done = next;
    }
    cells
}

fn directions() -> [Vec2; 6] {
    std::array::from_fn(|k| {
        let t = k as f64 * PI / 6.0;
        Vec2::new(t.cos(), t.sin())
    })
}

fn extent(pieces: &[Vec<Vec2>], u: &Vec2) -> (f64, f64) {
    pieces
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.dot(u)), b.max(p.dot(u))))
}

// Largest extent over the directions at multiples of 30°.
fn width(pieces: &[Vec<Vec2>]) -> f64 {
    directions().iter().map(|u| extent(pieces, u)).map(|(a, b)| b - a).fold(0.0, f64::max)
}

type Pieces = Vec<Vec<Vec2>>;

// Cut perpendicular to `axis` so that the lower side carries area `target`.
fn cut(pieces: &[Vec<Vec2>], axis: &Vec2, target: f64) -> (Pieces, Pieces) {
    let spans: Vec<(f64, f64, f64)> = pieces
        .iter()
        .map(|v| {
            let (a, b) = extent(std::slice::from_ref(v), axis);
            (a, b, polygon_area(v))
        })
        .collect();
    let below = |c: f64| -> f64 {
        let mut s = 0.0;
        for (v, (a, b, ar)) in pieces.iter().zip(&spans) {
            if *b <= c {
                s += ar;
            } else if *a < c {
                s += polygon_area(&clip_convex(v, axis, c));
            }
        }
        s
    };
    let (mut a, mut b) = extent(pieces, axis);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if below(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    let c = 0.5 * (a + b);
    let (mut left, mut right) = (Vec::new(), Vec::new());
    // Slivers thinner than rounding are dropped; their mass is below 1e-14 of the parent piece.
    for (v, (lo_p, hi_p, ar)) in pieces.iter().zip(spans) {
        if hi_p <= c {
            left.push(v.clone());
        } else if lo_p >= c {
            right.push(v.clone());
        } else {
            let l = clip_convex(v, axis, c);
            let r = clip_convex(v, &-axis, -c);
            if l.len() >= 3 && polygon_area(&l) > 1e-14 * ar {
                left.push(l);
            }
            if r.len() >= 3 && polygon_area(&r) > 1e-14 * ar {
                right.push(r);
            }
        }
    }
    (left, right)
}

// Recursive bisection: each split tries every direction and keeps the one
// whose children are most compact relative to their cell counts.
fn split_pieces(pieces: Pieces, area: f64, n: usize) -> Vec<Pieces> {
    if n == 1 {
        return vec![pieces];
    }
    let mut splits = vec![n / 2];
    if n >= 4 {
        splits.extend([n / 3, n - n / 3, n / 4, n - n / 4]);
    }
    splits.dedup();
    let candidates: Vec<(f64, usize, Pieces, Pieces)> = splits
        .iter()
        .flat_map(|&n1| directions().map(move |u| (n1, u)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n1, u)| {
            let (l, r) = cut(&pieces, &u, area * n1 as f64 / n as f64);
            let score = (width(&l) / (n1 as f64).sqrt()).max(width(&r) / ((n - n1) as f64).sqrt());
            (score, n1, l, r)
        })
        .collect();
    let best = (0..candidates.len())
        .min_by(|&i, &j| candidates[i].0.total_cmp(&candidates[j].0))
        .unwrap_or(0);
    let (_, n1, left, right) = candidates.into_iter().nth(best).expect("candidate cuts");
    let al: f64 = left.iter().map(|v| polygon_area(v)).sum();
    let ar: f64 = right.iter().map(|v| polygon_area(v)).sum();
    let (mut l, r) = rayon::join(|| split_pieces(left, al, n1), || split_pieces(right, ar, n - n1));
    l.extend(r);
    l
}

fn rcb_cells(pieces: Vec<Vec<Vec2>>, total: f64, n: usize) -> Vec<Cell> {
    let area: f64 = pieces.iter().map(|v| polygon_area(v)).sum();
    split_pieces(pieces, area, n).into_par_iter().map(|ps| pieces_cell(ps, total)).collect()
}

fn sector_cell(r0: f64, r1: f64, t0: f64, t1: f64, total_angle_norm: f64) -> Cell {
    let dt = t1 - t0;
    let measure = (r1 * r1 - r0 * r0) * dt / total_angle_norm;
    let rbar = 2.0 / 3.0 * (r1.powi(3) - r0.powi(3)) / (r1 * r1 - r0 * r0) * (dt / 2.0).sin() / (dt / 2.0);
    let tm = 0.5 * (t0 + t1);
    let boundary = (0..=16).flat_map(|i| {
        let t = t0 + dt * i as f64 / 16.0;
        [r0, r1].map(|r| Vec3::new(r * t.cos(), r * t.sin(), 0.0))
    });
    Cell {
        measure,
        diameter: sampled_diameter(boundary),
        representative: Vec3::new(rbar * tm.cos(), rbar * tm.sin(), 0.0),
        region: Region::Sector { r0, r1, t0, t1 },
    }
}

fn disk_cells(radius: f64, n: usize) -> Vec<Cell> {
    let m = ((n as f64 / PI).sqrt().round() as usize).clamp(1, n);
    let mut cells = Vec::with_capacity(n);
    let mut done = 0usize;
    for i in 0..m {
        let next = n * (i + 1) * (i + 1) / (m * m);
        let k = next - done;
        if k == 0 {
            continue;
        }
        let r0 = radius * (done as f64 / n as f64).sqrt();
        let r1 = if next == n { radius } else { radius * (next as f64 / n as f64).sqrt() };
        for j in 0..k {
            let t0 = 2.0 * PI * j as f64 / k as f64;
            let t1 = 2.0 * PI * (j + 1) as f64 / k as f64;
            cells.push(sector_cell(r0, r1, t0, t1, radius * radius * 2.0 * PI));
        }
        done = next;
    }
    cells
}

fn arc_cells(radius: f64, n: usize) -> Vec<Cell> {
    let dt = 2.0 * PI / n as f64;
    let diameter = if dt >= PI { 2.0 * radius } else { 2.0 * radius * (dt / 2.0).sin() };
    (0..n)
        .map(|j| {
            let t = dt * j as f64;
            Cell {
                measure: 1.0 / n as f64,
                diameter,
                representative: Vec3::new(radius * t.cos(), radius * t.sin(), 0.0),
                region: Region::Arc { radius, t0: t - 0.5 * dt, t1: t + 0.5 * dt },
            }
        })
        .collect()
}

fn curve_cells(curve: &Arc<Polyline>, n: usize) -> Vec<Cell> {
    let nv = curve.vertices().len();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let (s0, s1) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
            let (mut first, mut hi) = (0usize, nv);
            while first < hi {
                let mid = (first + hi) / 2;
                if curve.fraction_at_vertex(mid) <= s0 {
                    first = mid + 1;
                } else {
                    hi = mid;
                }
            }
            let mut v = vec![curve.point_at(s0)];
            let mut i = first;
            while i < nv && curve.fraction_at_vertex(i) < s1 {
                v.push(curve.vertices()[i]);
                i += 1;
            }
            v.push(curve.point_at(s1));
            Cell {
                measure: s1 - s0,
                diameter: hull_diameter(&v),
                representative: to3(curve.point_at(0.5 * (s0 + s1))),
                region: Region::Block(v),
            }
        })
        .collect()
}

fn zone_cell(radius: f64, z0: f64, z1: f64, p0: f64, p1: f64) -> Cell {
    let representative = if z1 >= 1.0 && p1 - p0 >= 2.0 * PI && z0 > -1.0 {
        Vec3::new(0.0, 0.0, radius)
    } else if z0 <= -1.0 && p1 - p0 >= 2.0 * PI && z1 < 1.0 {
        Vec3::new(0.0, 0.0, -radius)
    } else {
        zone_point(radius, 0.5 * (z0 + z1), 0.5 * (p0 + p1))
    };
    let boundary = (0..=16).flat_map(|i| {
        let ph = p0 + (p1 - p0) * i as f64 / 16.0;
        [z0, 0.5 * (z0 + z1), z1].map(|z| zone_point(radius, z, ph))
    });
    let mut diameter = sampled_diameter(boundary);
    if z0 < 0.0 && z1 > 0.0 && p1 - p0 >= PI {
        diameter = 2.0 * radius;
    }
    Cell {
        measure: (z1 - z0) / 2.0 * (p1 - p0) / (2.0 * PI),
        diameter,
        representative,
        region: Region::Zone { radius, z0, z1, p0, p1 },
    }
}

fn sphere_cells(radius: f64, n: usize) -> Vec<Cell> {
    let full = 2.0 * PI;
    if n == 1 {
        return vec![zone_cell(radius, -1.0, 1.0, 0.0, full)];
    }
    if n == 2 {
        return vec![zone_cell(radius, 0.0, 1.0, 0.0, full), zone_cell(radius, -1.0, 0.0, 0.0, full)];
    }
    let nf = n as f64;
    let cap = (1.0 - 2.0 / nf).acos();
    let delta = (4.0 * PI / nf).sqrt();
    let collars = (((PI - 2.0 * cap) / delta).round() as usize).max(1);
    let mut counts = Vec::with_capacity(collars);
    let mut cum_ideal = 0.0f64;
    let mut done = 0usize;
    for j in 0..collars {
        let th0 = cap + (PI - 2.0 * cap) * j as f64 / collars as f64;
        let th1 = cap + (PI - 2.0 * cap) * (j + 1) as f64 / collars as f64;
        cum_ideal += nf * (th0.cos() - th1.cos()) / 2.0;
        let target = if j + 1 == collars { n - 2 } else { (cum_ideal.round() as usize).min(n - 2) };
        counts.push(target - done);
        done = target;
    }
    let z_at = |c: usize| 1.0 - 2.0 * c as f64 / nf;
    let mut cells = vec![zone_cell(radius, z_at(1), 1.0, 0.0, full)];
    let mut c = 1usize;
    for k in counts.into_iter().filter(|&k| k > 0) {
        let (z1, z0) = (z_at(c), z_at(c + k));
        for i in 0..k {
            cells.push(zone_cell(radius, z0, z1, full * i as f64 / k as f64, full * (i + 1) as f64 / k as f64));
        }
        c += k;
    }
    cells.push(zone_cell(radius, -1.0, z_at(n - 1), 0.0, full));
    cells
}

fn is_axis_rectangle(v: &[[f64; 2]]) -> bool {
    v.len() == 4 && (0..4).all(|i| {
        let (p, q) = (v[i], v[(i + 1) % 4]);
        p[0] == q[0] || p[1] == q[1]
    })
}

/// Equal-measure partition into `n` cells for the supported measures:
/// Lebesgue on an axis-parallel rectangle (row grid), on a disk (polar
/// rings), on a convex polygon or Koch region (recursive bisection of its
/// convex pieces), the Koch curve (arclength blocks), the circle (arcs)
/// and the sphere (zonal cells).
pub fn equal_measure_partition(mu: &PreparedMeasure, n: usize) -> Result<EqualMeasurePartition> {
    if n == 0 {
        return invalid("a partition needs at least one cell");
    }
    let unsupported = || LabError::UnsupportedPartition(mu.spec().id());
    let (cells, alpha_geom) = match &mu.spec().kind {
        MeasureKind::LebesgueOnShape { support } => {
            let body = mu.support_body().ok_or_else(unsupported)?;
            let cells = match (support, &body.geom) {
                (Shape::ConvexPolygon { vertices }, Geom::Polygon(p)) if is_axis_rectangle(vertices) => {
                    let (lo, hi) = p.bbox();
                    grid_cells(lo, hi, n)
                }
                (Shape::ConvexPolygon { .. }, Geom::Polygon(p)) => rcb_cells(vec![p.vertices().to_vec()], p.area(), n),
                (Shape::KochRegion { level }, Geom::Polygon(p)) => {
                    let forest = koch::forest(*level)?;
                    rcb_cells(forest.iter().map(|t| t.to_vec()).collect(), p.area(), n)
                }
                (_, Geom::Ball { radius, dim: Dim::Two }) => disk_cells(*radius, n),
                _ => return Err(unsupported()),
            };
            (cells, 2.0)
        }
        MeasureKind::KochCurveMeasure { level } => (curve_cells(&koch::curve(*level)?, n), mu.alpha()),
        MeasureKind::CircleArcMeasure { radius } => (arc_cells(*radius, n), 1.0),
        MeasureKind::SphereSurfaceMeasure { radius } => (sphere_cells(*radius, n), 2.0),
        MeasureKind::Pushforward { .. } => return Err(unsupported()),
    };
    let max_diameter = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
    Ok(EqualMeasurePartition {
        constant: max_diameter * (n as f64).powf(1.0 / alpha_geom),
        cells,
        alpha_geom,
        max_diameter,
    })
}

/// One point per cell of an equal-measure partition: the cell's measure
/// centroid (or a point of the cell when the centroid falls outside it),
/// or a jittered draw when requested.
pub fn partition_points_with(mu: &PreparedMeasure, n: usize, seed: u64, opts: &PartitionOptions) -> Result<PointSet> {
    let part = equal_measure_partition(mu, n)?;
    let pts = part
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if opts.jitter {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                c.sample(&mut rng)
            } else {
                c.representative
            }
        })
        .collect();
    PointSet::new(mu.dim(), pts, Generator::Partition, Some(seed), Some(mu.spec().id()))
}

pub fn partition_points(mu: &PreparedMeasure, n: usize, seed: u64) -> Result<PointSet> {
    partition_points_with(mu, n, seed, &PartitionOptions::default())
}
