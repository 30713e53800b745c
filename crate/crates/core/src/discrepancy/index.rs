use crate::geometry::Vec3;
use crate::pointset::PointSet;

/// Uniform bucket grid over the bounding box of a point set, about one
/// point per bucket.
#[derive(Clone, Debug)]
pub struct PointIndex {
    lo: Vec3,
    cell: Vec3,
    dims: [usize; 3],
    // Bucket `b` holds `points[starts[b]..starts[b + 1]]`.
    starts: Vec<usize>,
    points: Vec<Vec3>,
}

impl PointIndex {
    pub fn new(set: &PointSet) -> Self {
        let pts = set.points();
        let d = set.dim().get();
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for p in pts {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if pts.is_empty() {
            lo = Vec3::zeros();
            hi = Vec3::zeros();
        }
        let per_axis = ((pts.len().max(1) as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
        let mut dims = [1usize; 3];
        let mut cell = Vec3::repeat(1.0);
        for i in 0..d {
            let ext = hi[i] - lo[i];
            if ext > 0.0 {
                dims[i] = per_axis;
                cell[i] = ext / per_axis as f64;
            }
        }
        let mut idx = PointIndex { lo, cell, dims, starts: Vec::new(), points: Vec::new() };
        let n_buckets = dims.iter().product::<usize>();
        let keys: Vec<usize> = pts.iter().map(|p| idx.bucket(p)).collect();
        let mut starts = vec![0usize; n_buckets + 1];
        for &k in &keys {
            starts[k + 1] += 1;
        }
        for b in 0..n_buckets {
            starts[b + 1] += starts[b];
        }
        let mut fill = starts.clone();
        let mut sorted = vec![Vec3::zeros(); pts.len()];
        for (p, &k) in pts.iter().zip(&keys) {
            sorted[fill[k]] = *p;
            fill[k] += 1;
        }
        idx.starts = starts;
        idx.points = sorted;
        idx
    }

    fn coord(&self, x: f64, i: usize) -> usize {
        (((x - self.lo[i]) / self.cell[i]).floor().max(0.0) as usize).min(self.dims[i] - 1)
    }

    fn bucket(&self, p: &Vec3) -> usize {
        let (i, j, k) = (self.coord(p.x, 0), self.coord(p.y, 1), self.coord(p.z, 2));
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    /// Calls `f` on every point of the buckets meeting the cube around `B(c, r)`.
    pub fn visit_ball(&self, c: &Vec3, r: f64, mut f: impl FnMut(&Vec3)) {
        let mut range = [(0usize, 0usize); 3];
        for (i, slot) in range.iter_mut().enumerate() {
            if self.dims[i] == 1 {
                *slot = (0, 0);
                continue;
            }
            let (a, b) = (c[i] - r, c[i] + r);
            let top = self.lo[i] + self.cell[i] * self.dims[i] as f64;
            if b < self.lo[i] || a > top {
                return;
            }
            *slot = (self.coord(a, i), self.coord(b, i));
        }
        for k in range[2].0..=range[2].1 {
            for j in range[1].0..=range[1].1 {
                let row = (k * self.dims[1] + j) * self.dims[0];
                let (s, e) = (self.starts[row + range[0].0], self.starts[row + range[0].1 + 1]);
                self.points[s..e].iter().for_each(&mut f);
            }
        }
    }
}
