//! Point distributions: iid baselines, equal-measure partition points and
//! the equispaced circle.

mod partition;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::geometry::{Dim, Vec3};
use crate::measure::PreparedMeasure;

pub use partition::{
    equal_measure_partition, partition_points, partition_points_with, Cell, EqualMeasurePartition, PartitionOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Iid,
    Partition,
    EquispacedCircle,
    External,
}

impl Generator {
    pub fn as_str(self) -> &'static str {
        match self {
            Generator::Iid => "iid",
            Generator::Partition => "partition",
            Generator::EquispacedCircle => "equispaced-circle",
            Generator::External => "external",
        }
    }
}

/// Sidecar record written next to an exported point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSetMeta {
    pub generator: Generator,
    pub seed: Option<u64>,
    pub n: usize,
    pub dim: Dim,
    pub measure: Option<String>,
}

/// `N ≥ 1` points in the plane or in space (planar points have `z = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: Dim,
    points: Vec<Vec3>,
    generator: Generator,
    seed: Option<u64>,
    measure: Option<String>,
}

impl PointSet {
    pub fn new(dim: Dim, points: Vec<Vec3>, generator: Generator, seed: Option<u64>, measure: Option<String>) -> Result<Self> {
        if points.is_empty() {
            return invalid("a point set needs at least one point");
        }
        if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
            return invalid("point coordinates must be finite");
        }
        if dim == Dim::Two && points.iter().any(|p| p.z != 0.0) {
            return invalid("planar points must have z = 0");
        }
        Ok(PointSet { dim, points, generator, seed, measure })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn measure_id(&self) -> Option<&str> {
        self.measure.as_deref()
    }

    pub fn meta(&self) -> PointSetMeta {
        PointSetMeta {
            generator: self.generator,
            seed: self.seed,
            n: self.len(),
            dim: self.dim,
            measure: self.measure.clone(),
        }
    }

    /// Errors unless every point lies in the closed ball `B(0, radius)`.
    pub fn check_within(&self, radius: f64) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            let norm = p.norm();
            if norm > radius {
                return Err(LabError::PointOutsideSupport { index, norm, radius });
            }
        }
        Ok(())
    }

    /// `x ↦ σx + shift` applied to every point.
    pub fn moved(&self, rotation: &crate::geometry::Rotation, shift: &Vec3) -> Result<Self> {
        let pts = self.points.iter().map(|p| rotation.apply(p) + shift).collect();
        PointSet::new(self.dim, pts, self.generator, self.seed, self.measure.clone())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.dim.get();
        w.write_record(&["x", "y", "z"][..d])?;
        for p in &self.points {
            w.write_record(p.iter().take(d).map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV with an `x,y` or `x,y,z` header; the result is tagged external.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let d = r.headers()?.len();
        let dim = Dim::try_from(d)?;
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let mut p = Vec3::zeros();
            for (i, f) in rec.iter().enumerate().take(d) {
                p[i] = f
                    .trim()
                    .parse()
                    .map_err(|_| LabError::InvalidArgument(format!("bad coordinate {f:?}")))?;
            }
            points.push(p);
        }
        PointSet::new(dim, points, Generator::External, None, None)
    }

    /// Writes `path` as CSV and `path` with a `.json` extension as the sidecar.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        self.write_csv(BufWriter::new(File::create(path)?))?;
        let side = path.with_extension("json");
        serde_json::to_writer_pretty(BufWriter::new(File::create(&side)?), &self.meta())?;
        Ok(side)
    }

    /// Reads a CSV and, when present, its sidecar metadata.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|_| LabError::MissingConfig(path.to_path_buf()))?;
        let mut set = PointSet::read_csv(BufReader::new(file))?;
        let side = path.with_extension("json");
        if side.exists() {
            let meta: PointSetMeta = serde_json::from_reader(BufReader::new(File::open(side)?))?;
            if meta.n != set.len() || meta.dim != set.dim {
                return invalid("sidecar metadata does not match the CSV contents");
            }
            set.generator = meta.generator;
            set.seed = meta.seed;
            set.measure = meta.measure;
        }
        Ok(set)
    }
}

/// `n` iid draws from `μ`.
pub fn iid_points(mu: &PreparedMeasure, n: usize, seed: u64) -> Result<PointSet> {
    mu.sample(n, seed)
}

/// Radius of the circle of circumference one.
pub const UNIT_CIRCUMFERENCE_RADIUS: f64 = 0.5 / std::f64::consts::PI;

/// `n` points at arclength `j/n` on the circle of circumference one about the origin.
pub fn equispaced_circle(n: usize) -> Result<PointSet> {
    if n == 0 {
        return invalid("equispaced circle needs n ≥ 1");
    }
    let r = UNIT_CIRCUMFERENCE_RADIUS;
    let pts = (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            Vec3::new(r * t.cos(), r * t.sin(), 0.0)
        })
        .collect();
    PointSet::new(Dim::Two, pts, Generator::EquispacedCircle, None, Some(format!("circle-r{r}")))
}

#[cfg(test)]
mod tests;
