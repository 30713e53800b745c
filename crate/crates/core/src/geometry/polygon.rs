//! Simple polygons with a uniform-grid edge index.
//!
//! Each grid cell stores the edges overlapping it and whether its center is
//! inside. Membership walks from the cell center to the query point and
//! toggles on every edge crossed, so a query touches only one cell's edges.
//! Segment clipping and polygon–polygon intersection areas build on the
//! same crossing rule.

use std::f64::consts::PI;

use crate::error::{LabError, Result};

use super::{AffinePose, Vec2, Vec3};

#[inline]
fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

#[inline]
fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed shoelace area.
pub fn polygon_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(&v[i], &v[(i + 1) % n])).sum::<f64>() * 0.5
}

pub(crate) fn polygon_centroid(v: &[Vec2]) -> Vec2 {
    let n = v.len();
    let mut a = 0.0;
    let mut c = Vec2::zeros();
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let w = cross(&p, &q);
        a += w;
        c += (p + q) * w;
    }
    if a.abs() < 1e-300 {
        return v.iter().sum::<Vec2>() / n as f64;
    }
    c / (3.0 * a)
}

pub(crate) fn check_convex_ccw(v: &[Vec2]) -> Result<()> {
    if v.len() < 3 {
        return Err(LabError::InvalidShape("polygon needs at least 3 vertices".into()));
    }
    if !v.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        return Err(LabError::InvalidShape("polygon vertices must be finite".into()));
    }
    let n = v.len();
    let mut turn = 0.0;
    for i in 0..n {
        let o = orient(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]);
        if o < 0.0 {
            return Err(LabError::InvalidShape("polygon must be convex and counterclockwise".into()));
        }
        let (a, b) = (v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]);
        turn += cross(&a, &b).atan2(a.dot(&b));
    }
    if polygon_area(v) <= 0.0 || (turn - 2.0 * PI).abs() > 1e-6 {
        return Err(LabError::InvalidShape("polygon must be simple, convex and counterclockwise".into()));
    }
    Ok(())
}

/// Area of the part of a disk of radius `r` centered at `d·n` (signed offset)
/// lying in the half-plane `{y ≥ 0}`, written as the cap `{t ≥ d}` of a
/// centered disk.
pub fn circle_segment_area(r: f64, d: f64) -> f64 {
    if d >= r {
        0.0
    } else if d <= -r {
        PI * r * r
    } else {
        r * r * (d / r).acos() - d * (r * r - d * d).sqrt()
    }
}

/// Area of the intersection of two disks with radii `r1`, `r2` at distance `d`.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
}

// Signed area of disk(0, r) ∩ triangle(0, a, b).
fn disk_triangle(a: Vec2, b: Vec2, r: f64) -> f64 {
    let d = b - a;
    let qa = d.dot(&d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * a.dot(&d);
    let qc = a.dot(&a) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    let mut ts = [0.0, 0.0, 0.0, 1.0];
    let mut k = 1;
    if disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                ts[k] = t;
                k += 1;
            }
        }
    }
    ts[k] = 1.0;
    let mut sum = 0.0;
    for i in 0..k {
        let u = a + d * ts[i];
        let v = a + d * ts[i + 1];
        let m = (u + v) * 0.5;
        if disc > 0.0 && m.norm_squared() <= r * r {
            sum += 0.5 * cross(&u, &v);
        } else {
            sum += 0.5 * r * r * cross(&u, &v).atan2(u.dot(&v));
        }
    }
    sum
}

/// Area of `disk(c, r) ∩ P` for a counterclockwise polygon `P`.
pub fn disk_polygon_area(v: &[Vec2], c: &Vec2, r: f64) -> f64 {
    let n = v.len();
    // Exact answers when the disk misses the bounding box or holds every vertex.
    let (mut lo, mut hi, mut far) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY), 0.0f64);
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
        far = far.max((p - c).norm_squared());
    }
    let near = c.sup(&lo).inf(&hi);
    if (near - c).norm_squared() >= r * r {
        return 0.0;
    }
    if far <= r * r {
        return polygon_area(v);
    }
    (0..n).map(|i| disk_triangle(v[i] - c, v[(i + 1) % n] - c, r)).sum()
}

/// Area of `P ∩ {x · θ ≥ ρ}` by one Sutherland–Hodgman pass; valid for
/// non-convex `P` because the clipped ring's shoelace sum is exact.
pub fn halfplane_polygon_area(v: &[Vec2], theta: &Vec2, rho: f64) -> f64 {
    let n = v.len();
    let mut area2 = 0.0;
    let mut first: Option<Vec2> = None;
    let mut last: Option<Vec2> = None;
    let mut push = |p: Vec2| {
        if let Some(l) = last {
            area2 += cross(&l, &p);
        } else {
            first = Some(p);
        }
        last = Some(p);
    };
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let (sp, sq) = (p.dot(theta) - rho, q.dot(theta) - rho);
        if sp >= 0.0 {
            push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            push(p + (q - p) * t);
        }
    }
    if let (Some(f), Some(l)) = (first, last) {
        area2 += cross(&l, &f);
    }
    0.5 * area2
}

/// Clip a convex polygon to `{x · n ≤ c}`.
pub(crate) fn clip_convex(v: &[Vec2], n: &Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let k = v.len();
    for i in 0..k {
        let (p, q) = (v[i], v[(i + 1) % k]);
        let (sp, sq) = (p.dot(n) - c, q.dot(n) - c);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            out.push(p + (q - p) * (sp / (sp - sq)));
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Grid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
    center_inside: Vec<bool>,
}

impl Grid {
    #[inline]
    fn cell_of(&self, p: &Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.cell;
        let fy = (p.y - self.origin.y) / self.cell;
        if fx >= 0.0 && fy >= 0.0 && fx < self.nx as f64 && fy < self.ny as f64 {
            Some((fx as usize, fy as usize))
        } else {
            None
        }
    }

    #[inline]
    fn edges(&self, i: usize, j: usize) -> &[u32] {
        let k = j * self.nx + i;
        &self.items[self.start[k] as usize..self.start[k + 1] as usize]
    }

    fn center(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.cell, (j as f64 + 0.5) * self.cell)
    }

    fn clamp_col(&self, x: f64) -> usize {
        (((x - self.origin.x) / self.cell).floor().max(0.0) as usize).min(self.nx - 1)
    }

    fn clamp_row(&self, y: f64) -> usize {
        (((y - self.origin.y) / self.cell).floor().max(0.0) as usize).min(self.ny - 1)
    }
}

/// A simple counterclockwise polygon with a grid index over its edges.
#[derive(Clone, Debug)]
pub struct IndexedPolygon {
    verts: Vec<Vec2>,
    area: f64,
    centroid: Vec2,
    lo: Vec2,
    hi: Vec2,
    radius: f64,
    grid: Grid,
}

impl IndexedPolygon {
    pub fn new(verts: Vec<Vec2>) -> Result<Self> {
        if verts.len() < 3 {
            return Err(LabError::InvalidShape("polygon needs at least 3 vertices".into()));
        }
        let area = polygon_area(&verts);
        if !(area > 0.0) {
            return Err(LabError::InvalidShape("polygon must be counterclockwise with positive area".into()));
        }
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for v in &verts {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let radius = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let centroid = polygon_centroid(&verts);
        let grid = Self::build_grid(&verts, lo, hi);
        Ok(Self { verts, area, centroid, lo, hi, radius, grid })
    }

    fn build_grid(v: &[Vec2], lo: Vec2, hi: Vec2) -> Grid {
        let n = v.len();
        let g = ((n as f64).sqrt().ceil() as usize).clamp(4, 2048);
        let ext = (hi - lo).max();
        // An off-lattice padding keeps cell centers away from vertex coordinates.
        let pad = ext * 0.012_731_415_9;
        let cell = (ext + 2.0 * pad) / g as f64;
        let origin = lo - Vec2::repeat(pad);
        let nx = (((hi.x - lo.x) + 2.0 * pad) / cell).ceil().max(1.0) as usize;
        let ny = (((hi.y - lo.y) + 2.0 * pad) / cell).ceil().max(1.0) as usize;
        let mut grid = Grid { origin, cell, nx, ny, start: vec![0; nx * ny + 1], items: Vec::new(), center_inside: vec![false; nx * ny] };

        let span = |grid: &Grid, e: usize| {
            let (a, b) = (v[e], v[(e + 1) % n]);
            (
                grid.clamp_col(a.x.min(b.x)),
                grid.clamp_col(a.x.max(b.x)),
                grid.clamp_row(a.y.min(b.y)),
                grid.clamp_row(a.y.max(b.y)),
            )
        };
        let mut count = vec![0u32; nx * ny];
        for e in 0..n {
            let (i0, i1, j0, j1) = span(&grid, e);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    count[j * nx + i] += 1;
                }
            }
        }
        for k in 0..nx * ny {
            grid.start[k + 1] = grid.start[k] + count[k];
        }
        let mut fill = grid.start[..nx * ny].to_vec();
        grid.items = vec![0; grid.start[nx * ny] as usize];
        for e in 0..n {
            let (i0, i1, j0, j1) = span(&grid, e);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let k = j * nx + i;
                    grid.items[fill[k] as usize] = e as u32;
                    fill[k] += 1;
                }
            }
        }

        // Scanline parity at each row of cell centers.
        let mut row_edges: Vec<u32> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for j in 0..ny {
            let y = origin.y + (j as f64 + 0.5) * cell;
            row_edges.clear();
            for i in 0..nx {
                row_edges.extend_from_slice(grid.edges(i, j));
            }
            row_edges.sort_unstable();
            row_edges.dedup();
            xs.clear();
            for &e in &row_edges {
                let (a, b) = (v[e as usize], v[(e as usize + 1) % n]);
                if (a.y > y) != (b.y > y) {
                    xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            xs.sort_by(|a, b| a.total_cmp(b));
            let mut k = 0;
            for i in 0..nx {
                let x = origin.x + (i as f64 + 0.5) * cell;
                while k < xs.len() && xs[k] <= x {
                    k += 1;
                }
                grid.center_inside[j * nx + i] = (xs.len() - k) % 2 == 1;
            }
        }
        grid
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn centroid(&self) -> Vec2 {
        self.centroid
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn edge(&self, e: u32) -> (Vec2, Vec2) {
        let e = e as usize;
        (self.verts[e], self.verts[(e + 1) % self.verts.len()])
    }

    /// Point-in-polygon; points on an edge count as inside.
    pub fn contains(&self, p: &Vec2) -> bool {
        let Some((i, j)) = self.grid.cell_of(p) else {
            return false;
        };
        let c = self.grid.center(i, j);
        let mut inside = self.grid.center_inside[j * self.grid.nx + i];
        for &e in self.grid.edges(i, j) {
            let (a, b) = self.edge(e);
            let o4 = orient(&a, &b, p);
            if o4 == 0.0
                && p.x >= a.x.min(b.x)
                && p.x <= a.x.max(b.x)
                && p.y >= a.y.min(b.y)
                && p.y <= a.y.max(b.y)
            {
                return true;
            }
            let o1 = orient(&c, p, &a);
            let o2 = orient(&c, p, &b);
            if (o1 > 0.0) != (o2 > 0.0) {
                let o3 = orient(&a, &b, &c);
                if (o3 > 0.0) != (o4 > 0.0) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn cells_along(&self, a: &Vec2, b: &Vec2, out: &mut Vec<u32>) {
        let g = &self.grid;
        let (xmin, xmax) = (a.x.min(b.x), a.x.max(b.x));
        let (ymin, ymax) = (a.y.min(b.y), a.y.max(b.y));
        let gx1 = g.origin.x + g.nx as f64 * g.cell;
        let gy1 = g.origin.y + g.ny as f64 * g.cell;
        if xmax < g.origin.x || xmin > gx1 || ymax < g.origin.y || ymin > gy1 {
            return;
        }
        let eps = 1e-9 * g.cell;
        let i0 = g.clamp_col(xmin - eps);
        let i1 = g.clamp_col(xmax + eps);
        let dx = b.x - a.x;
        for i in i0..=i1 {
            let (ylo, yhi) = if dx.abs() < 1e-300 {
                (ymin, ymax)
            } else {
                let cx0 = (g.origin.x + i as f64 * g.cell).max(xmin);
                let cx1 = (g.origin.x + (i + 1) as f64 * g.cell).min(xmax);
                let y0 = a.y + (cx0 - a.x) / dx * (b.y - a.y);
                let y1 = a.y + (cx1 - a.x) / dx * (b.y - a.y);
                (y0.min(y1).max(ymin), y0.max(y1).min(ymax))
            };
            let j0 = g.clamp_row(ylo - eps);
            let j1 = g.clamp_row(yhi + eps);
            for j in j0..=j1 {
                out.extend_from_slice(g.edges(i, j));
            }
        }
    }

    /// Parameter intervals `[t0, t1] ⊆ [0, 1]` of the segment `a → b` lying inside.
    pub fn clip_segment(&self, a: &Vec2, b: &Vec2) -> Vec<(f64, f64)> {
        let ca = self.grid.cell_of(a);
        if let Some((i, j)) = ca.filter(|_| ca == self.grid.cell_of(b)) {
            if self.grid.edges(i, j).is_empty() {
                return if self.grid.center_inside[j * self.grid.nx + i] { vec![(0.0, 1.0)] } else { vec![] };
            }
        }
        let mut cand = Vec::new();
        self.cells_along(a, b, &mut cand);
        cand.sort_unstable();
        cand.dedup();
        let mut ts: Vec<f64> = Vec::new();
        for &e in &cand {
            let (u, v) = self.edge(e);
            let o1 = orient(a, b, &u);
            let o2 = orient(a, b, &v);
            if (o1 > 0.0) == (o2 > 0.0) {
                continue;
            }
            let o3 = orient(&u, &v, a);
            let o4 = orient(&u, &v, b);
            if (o3 > 0.0) == (o4 > 0.0) {
                continue;
            }
            ts.push((o3 / (o3 - o4)).clamp(0.0, 1.0));
        }
        ts.sort_by(|x, y| x.total_cmp(y));
        let mut inside = self.contains(a);
        let mut out = Vec::new();
        let mut t_prev = 0.0;
        for t in ts {
            if inside && t > t_prev {
                out.push((t_prev, t));
            }
            inside = !inside;
            t_prev = t;
        }
        if inside && t_prev < 1.0 {
            out.push((t_prev, 1.0));
        }
        out
    }

    /// Whether some edge lies within distance `t` of `p`.
    pub fn boundary_within(&self, p: &Vec2, t: f64) -> bool {
        let g = &self.grid;
        let t2 = t * t;
        let i0 = g.clamp_col(p.x - t);
        let i1 = g.clamp_col(p.x + t);
        let j0 = g.clamp_row(p.y - t);
        let j1 = g.clamp_row(p.y + t);
        if p.x + t < g.origin.x || p.y + t < g.origin.y {
            return false;
        }
        if p.x - t > g.origin.x + g.nx as f64 * g.cell || p.y - t > g.origin.y + g.ny as f64 * g.cell {
            return false;
        }
        for j in j0..=j1 {
            for i in i0..=i1 {
                for &e in g.edges(i, j) {
                    let (a, b) = self.edge(e);
                    if segment_dist2(p, &a, &b) <= t2 {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// `|P ∩ (x + τσQ)|` for another indexed polygon `Q` placed by `pose`,
    /// by Green's theorem over the two clipped boundaries.
    pub fn intersection_area(&self, other: &IndexedPolygon, pose: &AffinePose) -> f64 {
        let tau = pose.dilation;
        let c = pose.translation.xy();
        let r = tau * other.radius;
        let (olo, ohi) = (c - Vec2::repeat(r), c + Vec2::repeat(r));
        let mut sum = 0.0;
        let n = self.verts.len();
        for k in 0..n {
            let (p, q) = (self.verts[k], self.verts[(k + 1) % n]);
            if p.x.max(q.x) < olo.x || p.x.min(q.x) > ohi.x || p.y.max(q.y) < olo.y || p.y.min(q.y) > ohi.y {
                continue;
            }
            let lp = pose.to_local(&Vec3::new(p.x, p.y, 0.0)).xy();
            let lq = pose.to_local(&Vec3::new(q.x, q.y, 0.0)).xy();
            for (t0, t1) in other.clip_segment(&lp, &lq) {
                let u = p + (q - p) * t0;
                let v = p + (q - p) * t1;
                sum += cross(&u, &v);
            }
        }
        let m = other.verts.len();
        let mut prev = pose.to_world(&Vec3::new(other.verts[0].x, other.verts[0].y, 0.0)).xy();
        for k in 0..m {
            let nv = other.verts[(k + 1) % m];
            let q = pose.to_world(&Vec3::new(nv.x, nv.y, 0.0)).xy();
            let p = prev;
            prev = q;
            if p.x.max(q.x) < self.lo.x || p.x.min(q.x) > self.hi.x || p.y.max(q.y) < self.lo.y || p.y.min(q.y) > self.hi.y {
                continue;
            }
            for (t0, t1) in self.clip_segment(&p, &q) {
                let u = p + (q - p) * t0;
                let v = p + (q - p) * t1;
                sum += cross(&u, &v);
            }
        }
        0.5 * sum
    }
}

#[inline]
pub(crate) fn segment_dist2(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (a + d * t - p).norm_squared()
}
