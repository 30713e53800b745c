//! Polylines with a bounding-circle hierarchy over contiguous segment ranges.

use super::polygon::segment_dist2;
use super::{AffinePose, IndexedPolygon, Vec2, Vec3};
use crate::error::{LabError, Result};

const LEAF: usize = 8;

#[derive(Clone, Debug)]
struct Node {
    lo: u32,
    hi: u32,
    center: Vec2,
    radius: f64,
    length: f64,
    kids: Option<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct Polyline {
    verts: Vec<Vec2>,
    cum: Vec<f64>,
    lo: Vec2,
    hi: Vec2,
    radius: f64,
    nodes: Vec<Node>,
}

impl Polyline {
    /// Open polyline through the given vertices.
    pub fn open(verts: Vec<Vec2>) -> Result<Self> {
        if verts.len() < 2 {
            return Err(LabError::InvalidShape("polyline needs at least 2 vertices".into()));
        }
        // Neumaier summation keeps the running arclength exact to a few ulps.
        let mut cum = Vec::with_capacity(verts.len());
        cum.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for w in verts.windows(2) {
            let x = (w[1] - w[0]).norm();
            let t = sum + x;
            comp += if sum.abs() >= x { (sum - t) + x } else { (x - t) + sum };
            sum = t;
            cum.push(sum + comp);
        }
        if !(cum[verts.len() - 1] > 0.0) {
            return Err(LabError::InvalidShape("polyline has zero length".into()));
        }
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for v in &verts {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let radius = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut pl = Polyline { verts, cum, lo, hi, radius, nodes: Vec::new() };
        pl.build();
        Ok(pl)
    }

    /// Closed polyline; the first vertex is repeated at the end.
    pub fn closed(mut verts: Vec<Vec2>) -> Result<Self> {
        if let Some(&f) = verts.first() {
            verts.push(f);
        }
        Self::open(verts)
    }

    fn make_node(&self, lo: usize, hi: usize) -> Node {
        let pts = &self.verts[lo..=hi];
        let mut a = Vec2::repeat(f64::INFINITY);
        let mut b = Vec2::repeat(f64::NEG_INFINITY);
        for p in pts {
            a = a.inf(p);
            b = b.sup(p);
        }
        let center = (a + b) * 0.5;
        let radius = pts.iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
        Node { lo: lo as u32, hi: hi as u32, center, radius, length: self.cum[hi] - self.cum[lo], kids: None }
    }

    fn build(&mut self) {
        let n = self.num_segments();
        let root = self.make_node(0, n);
        self.nodes.push(root);
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let (lo, hi) = (self.nodes[k].lo as usize, self.nodes[k].hi as usize);
            if hi - lo <= LEAF {
                continue;
            }
            let mid = (lo + hi) / 2;
            let l = self.make_node(lo, mid);
            let r = self.make_node(mid, hi);
            let li = self.nodes.len() as u32;
            self.nodes.push(l);
            self.nodes.push(r);
            self.nodes[k].kids = Some((li, li + 1));
            stack.push(li as usize);
            stack.push(li as usize + 1);
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.verts
    }

    pub fn num_segments(&self) -> usize {
        self.verts.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.verts[i], self.verts[i + 1])
    }

    pub fn total_length(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    pub fn bounding_radius(&self) -> f64 {
        self.radius
    }

    /// Point at arclength fraction `s ∈ [0, 1]`.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let target = s.clamp(0.0, 1.0) * self.total_length();
        let i = self.cum.partition_point(|&c| c <= target).clamp(1, self.num_segments());
        let (a, b) = self.segment(i - 1);
        let len = self.cum[i] - self.cum[i - 1];
        let t = if len > 0.0 { (target - self.cum[i - 1]) / len } else { 0.0 };
        a + (b - a) * t.clamp(0.0, 1.0)
    }

    /// Arclength fraction at the start of vertex `i`.
    pub fn fraction_at_vertex(&self, i: usize) -> f64 {
        self.cum[i] / self.total_length()
    }

    /// Visit every segment whose hierarchy leaf may intersect the disk `B(c, r)`.
    pub fn visit_near(&self, c: &Vec2, r: f64, mut f: impl FnMut(usize)) {
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let nd = &self.nodes[k];
            if (nd.center - c).norm() - nd.radius > r {
                continue;
            }
            match nd.kids {
                Some((a, b)) => {
                    stack.push(a as usize);
                    stack.push(b as usize);
                }
                None => (nd.lo as usize..nd.hi as usize).for_each(&mut f),
            }
        }
    }

    /// Whether the curve passes within distance `t` of `p`.
    pub fn within(&self, p: &Vec2, t: f64) -> bool {
        let t2 = t * t;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let nd = &self.nodes[k];
            if (nd.center - p).norm() - nd.radius > t {
                continue;
            }
            match nd.kids {
                Some((a, b)) => {
                    stack.push(a as usize);
                    stack.push(b as usize);
                }
                None => {
                    for i in nd.lo as usize..nd.hi as usize {
                        if segment_dist2(p, &self.verts[i], &self.verts[i + 1]) <= t2 {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Length of the curve inside the closed disk `B(c, r)`.
    pub fn length_in_ball(&self, c: &Vec2, r: f64) -> f64 {
        let mut sum = 0.0;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let nd = &self.nodes[k];
            let d = (nd.center - c).norm();
            if d - nd.radius > r {
                continue;
            }
            if d + nd.radius <= r {
                sum += nd.length;
                continue;
            }
            match nd.kids {
                Some((a, b)) => {
                    stack.push(a as usize);
                    stack.push(b as usize);
                }
                None => {
                    for i in nd.lo as usize..nd.hi as usize {
                        sum += segment_in_ball(&self.verts[i], &self.verts[i + 1], c, r);
                    }
                }
            }
        }
        sum
    }

    /// Length of the curve in `{x · θ ≥ ρ}`.
    pub fn length_in_halfplane(&self, theta: &Vec2, rho: f64) -> f64 {
        let mut sum = 0.0;
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            let nd = &self.nodes[k];
            let s = nd.center.dot(theta) - rho;
            if s + nd.radius < 0.0 {
                continue;
            }
            if s - nd.radius >= 0.0 {
                sum += nd.length;
                continue;
            }
            match nd.kids {
                Some((a, b)) => {
                    stack.push(a as usize);
                    stack.push(b as usize);
                }
                None => {
                    for i in nd.lo as usize..nd.hi as usize {
                        let (a, b) = (self.verts[i], self.verts[i + 1]);
                        let (sa, sb) = (a.dot(theta) - rho, b.dot(theta) - rho);
                        let len = (b - a).norm();
                        sum += if sa >= 0.0 && sb >= 0.0 {
                            len
                        } else if sa < 0.0 && sb < 0.0 {
                            0.0
                        } else {
                            let t = sa / (sa - sb);
                            if sa >= 0.0 { t * len } else { (1.0 - t) * len }
                        };
                    }
                }
            }
        }
        sum
    }

    /// Length of the curve inside `x + τσP`.
    pub fn length_in_polygon(&self, poly: &IndexedPolygon, pose: &AffinePose) -> f64 {
        let c = pose.translation.xy();
        let reach = pose.dilation * poly.bounding_radius();
        let mut sum = 0.0;
        self.visit_near(&c, reach, |i| {
            let (a, b) = (self.verts[i], self.verts[i + 1]);
            let la = pose.to_local(&Vec3::new(a.x, a.y, 0.0)).xy();
            let lb = pose.to_local(&Vec3::new(b.x, b.y, 0.0)).xy();
            let len = (b - a).norm();
            for (t0, t1) in poly.clip_segment(&la, &lb) {
                sum += (t1 - t0) * len;
            }
        });
        sum
    }
}

fn segment_in_ball(a: &Vec2, b: &Vec2, c: &Vec2, r: f64) -> f64 {
    let d = b - a;
    let f = a - c;
    let qa = d.dot(&d);
    let qb = 2.0 * f.dot(&d);
    let qc = f.dot(&f) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 || qa == 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
    if t1 > t0 {
        (t1 - t0) * qa.sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::koch_polygon;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_ball(p: &Polyline, c: &Vec2, r: f64) -> f64 {
        (0..p.num_segments()).map(|i| segment_in_ball(&p.verts[i], &p.verts[i + 1], c, r)).sum()
    }

    #[test]
    fn hierarchy_matches_brute_force() {
        let p = Polyline::closed(koch_polygon(5).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let c = Vec2::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let r = rng.gen_range(0.001..0.8);
            assert!((p.length_in_ball(&c, r) - brute_ball(&p, &c, r)).abs() < 1e-12);
            let a: f64 = rng.gen_range(0.0..6.3);
            let th = Vec2::new(a.cos(), a.sin());
            let rho = rng.gen_range(-0.7..0.7);
            let brute: f64 = (0..p.num_segments())
                .map(|i| {
                    let (x, y) = p.segment(i);
                    let m = 4000;
                    (0..m).filter(|&k| (x + (y - x) * ((k as f64 + 0.5) / m as f64)).dot(&th) >= rho).count() as f64
                        / m as f64
                        * (y - x).norm()
                })
                .sum();
            assert!((p.length_in_halfplane(&th, rho) - brute).abs() < 1e-3 * p.total_length() / 100.0 + 1e-9);
        }
    }

    #[test]
    fn point_at_walks_arclength() {
        let p = Polyline::open(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 3.0)]).unwrap();
        assert!((p.point_at(0.125) - Vec2::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p.point_at(0.5) - Vec2::new(1.0, 1.0)).norm() < 1e-15);
        assert!((p.point_at(1.0) - Vec2::new(1.0, 3.0)).norm() < 1e-15);
        assert!(p.within(&Vec2::new(0.5, 0.1), 0.1 + 1e-12));
        assert!(!p.within(&Vec2::new(0.5, 0.2), 0.1));
    }
}
