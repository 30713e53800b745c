//! Sweeps over `N`: generate points, estimate the quadratic discrepancy,
//! fit the log–log slope and compare it with the predicted exponent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{l2, FamilySpec, L2Estimate, McConfig};
use crate::error::{invalid, LabError, Result};
use crate::geometry::Shape;
use crate::measure::{Evaluator, MeasureSpec, PreparedMeasure};
use crate::pointset::{equispaced_circle, iid_points, partition_points_with, PartitionOptions, PointSet};
use crate::stats::{wls, LineFit};

/// The smallest `N` drops out of the fit when its stderr exceeds this
/// fraction of its value.
pub const EXCLUSION_RATIO: f64 = 0.25;

pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Iid,
    Partition {
        #[serde(default)]
        jitter: bool,
    },
    EquispacedCircle,
    /// One CSV per `N`: `{N}` in the path is replaced by the size.
    Csv { path: String },
}

impl GeneratorSpec {
    fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Iid => "iid",
            GeneratorSpec::Partition { .. } => "partition",
            GeneratorSpec::EquispacedCircle => "equispaced-circle",
            GeneratorSpec::Csv { .. } => "csv",
        }
    }

    pub fn generate(&self, mu: &PreparedMeasure, n: usize, seed: u64, base: &Path) -> Result<PointSet> {
        match self {
            GeneratorSpec::Iid => iid_points(mu, n, seed),
            GeneratorSpec::Partition { jitter } => partition_points_with(mu, n, seed, &PartitionOptions { jitter: *jitter }),
            GeneratorSpec::EquispacedCircle => equispaced_circle(n),
            GeneratorSpec::Csv { path } => {
                let p = base.join(path.replace("{N}", &n.to_string()));
                let pts = PointSet::load(&p)?;
                if pts.len() != n {
                    return invalid(format!("{} holds {} points, expected {n}", p.display(), pts.len()));
                }
                Ok(pts)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyConfig {
    /// Translation box chosen by [`FamilySpec::affine`].
    Affine { shape: Shape, a: f64, b: f64 },
    HalfSpace,
}

/// Acceptance rule on the fitted slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeRule {
    /// Target slope; the predicted exponent when absent.
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl Default for SlopeRule {
    fn default() -> Self {
        SlopeRule { target: None, tolerance: DEFAULT_TOLERANCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub measure: MeasureSpec,
    pub family: FamilyConfig,
    pub generator: GeneratorSpec,
    pub n_list: Vec<usize>,
    pub poses: usize,
    #[serde(default)]
    pub seed: u64,
    /// Relative to the current directory; `out/<name>` when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub rule: SlopeRule,
    /// Empirical atoms for pairs without an exact evaluator.
    #[serde(default)]
    pub fallback_atoms: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => LabError::MissingConfig(path.to_path_buf()),
            _ => e.into(),
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.len() < 4 {
            return invalid(format!("{}: an exponent fit needs at least 4 sizes", self.name));
        }
        if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("{}: n_list must be positive and strictly increasing", self.name));
        }
        if !(self.rule.tolerance > 0.0) {
            return invalid("slope tolerance must be positive");
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| Path::new("out").join(&self.name))
    }

    fn family_spec(&self, mu: &PreparedMeasure) -> Result<FamilySpec> {
        match &self.family {
            FamilyConfig::Affine { shape, a, b } => FamilySpec::affine(shape.clone(), *a, *b, mu),
            FamilyConfig::HalfSpace => Ok(FamilySpec::halfspace(mu)),
        }
    }
}

/// Exponent the sweep is expected to show, and where its inputs came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    pub exponent: f64,
    pub provenance: String,
}

/// iid points follow the binomial variance, `N^{1/2}`; partition points
/// reach the upper-bound exponent `1/2 − β/(2d)`; any other generator is
/// held to the lower-bound exponent `1/2 − β/(2α)`.
pub fn predict(config: &ExperimentConfig, mu: &PreparedMeasure) -> Result<Prediction> {
    let alpha = mu.alpha();
    let dim = mu.dim().get();
    let (beta, from) = match &config.family {
        FamilyConfig::Affine { shape, .. } => match shape.beta() {
            Some(b) => (b, format!("β = {b:.6} of {}", shape.name())),
            None => return invalid(format!("{} has no boundary exponent β", shape.name())),
        },
        FamilyConfig::HalfSpace => (1.0, "β = 1 for half-spaces".to_string()),
    };
    let (exponent, rule) = match config.generator {
        GeneratorSpec::Iid => (0.5, "binomial variance N^{1/2}".to_string()),
        GeneratorSpec::Partition { .. } => (0.5 - beta / (2.0 * dim as f64), format!("upper bound 1/2 − β/(2d), d = {dim}")),
        _ => (0.5 - beta / (2.0 * alpha), format!("lower bound 1/2 − β/(2α), α = {alpha:.6}")),
    };
    Ok(Prediction { alpha, beta, dim, exponent, provenance: format!("{rule}; {from}; α from {}", mu.spec().id()) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_poses: usize,
    pub seed: u64,
    pub in_fit: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl From<LineFit> for SlopeFit {
    fn from(f: LineFit) -> Self {
        SlopeFit { slope: f.slope, intercept: f.intercept, slope_stderr: f.slope_stderr }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub measure: String,
    pub family: String,
    pub generator: String,
    pub seed: u64,
    pub prediction: Prediction,
    pub rows: Vec<ExperimentRow>,
    pub fit: SlopeFit,
    pub exclusion_rule: String,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// Weighted fit of `log₂ value` on `log₂ N`, with weights from the
/// per-point stderrs (`σ = stderr/(value·ln 2)`). Marks the rows used.
pub fn fit_rows(rows: &mut [ExperimentRow]) -> Result<SlopeFit> {
    for r in rows.iter_mut() {
        r.in_fit = r.value > 0.0;
    }
    if let Some(first) = rows.first_mut() {
        if first.stderr > EXCLUSION_RATIO * first.value {
            first.in_fit = false;
        }
    }
    let used: Vec<&ExperimentRow> = rows.iter().filter(|r| r.in_fit).collect();
    if used.len() < 2 {
        return invalid("fewer than two usable sizes for the slope fit");
    }
    let x: Vec<f64> = used.iter().map(|r| (r.n as f64).log2()).collect();
    let y: Vec<f64> = used.iter().map(|r| r.value.log2()).collect();
    let floor = used.iter().map(|r| r.stderr / r.value).fold(0.0, f64::max).max(1e-12) * 1e-6;
    let w: Vec<f64> = used
        .iter()
        .map(|r| {
            let s = (r.stderr / (r.value * std::f64::consts::LN_2)).max(floor);
            1.0 / (s * s)
        })
        .collect();
    Ok(wls(&x, &y, &w).into())
}

fn stage(n: usize, name: &str) -> impl FnOnce(LabError) -> LabError + '_ {
    move |e| LabError::Stage { n, stage: name.to_string(), source: Box::new(e) }
}

/// Pose seed for size `n`; distinct sizes get unrelated pose streams.
fn pose_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs the sweep and writes `report.json`, `rows.csv` and `plot.svg`
/// under the configured output directory; `base` resolves relative CSV
/// generator paths.
pub fn run_experiment(config: &ExperimentConfig, base: &Path) -> Result<ExperimentReport> {
    let report = compute_report(config, base)?;
    write_outputs(&report, &config.output_dir())?;
    Ok(report)
}

/// The sweep without file output.
pub fn compute_report(config: &ExperimentConfig, base: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let mu = config.measure.prepare()?;
    let eval = match config.fallback_atoms {
        Some(atoms) => Evaluator::with_fallback(mu.clone(), atoms, config.seed)?,
        None => Evaluator::exact_only(mu.clone()),
    };
    let family = config.family_spec(&mu)?;
    let prediction = predict(config, &mu)?;
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let pts = config.generator.generate(&mu, n, config.seed, base).map_err(stage(n, "point generation"))?;
        let mc = McConfig::new(config.poses, pose_seed(config.seed, n));
        let est: L2Estimate = l2(&pts, &eval, &family, &mc).map_err(stage(n, "discrepancy estimate"))?;
        rows.push(ExperimentRow { n, value: est.value, stderr: est.stderr, n_poses: est.n_poses, seed: mc.seed, in_fit: true });
    }
    let fit = fit_rows(&mut rows)?;
    let target = config.rule.target.unwrap_or(prediction.exponent);
    let verdict = Verdict {
        rule: format!("|slope − {target:.4}| ≤ {}", config.rule.tolerance),
        observed: fit.slope,
        target,
        tolerance: config.rule.tolerance,
        pass: (fit.slope - target).abs() <= config.rule.tolerance,
    };
    Ok(ExperimentReport {
        name: config.name.clone(),
        measure: mu.spec().id(),
        family: family.name(),
        generator: config.generator.name().into(),
        seed: config.seed,
        prediction,
        rows,
        fit,
        exclusion_rule: format!("smallest N left out when stderr > {EXCLUSION_RATIO}·value"),
        pass: verdict.pass,
        verdicts: vec![verdict],
    })
}

pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("rows.csv"))?;
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    std::fs::write(dir.join("plot.svg"), render_svg(report))?;
    Ok(())
}

/// Log–log scatter with stderr bars, the fitted line and a guide line of
/// the predicted slope through the fit's midpoint.
pub fn render_svg(report: &ExperimentReport) -> String {
    let (w, h, pad) = (640.0, 440.0, 60.0);
    let pts: Vec<(f64, f64, f64, f64)> = report
        .rows
        .iter()
        .filter(|r| r.value > 0.0)
        .map(|r| {
            let lo = (r.value - r.stderr).max(r.value * 1e-3);
            ((r.n as f64).log2(), r.value.log2(), lo.log2(), (r.value + r.stderr).log2())
        })
        .collect();
    let xs = pts.iter().map(|p| p.0);
    let (x0, x1) = xs.clone().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
    let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.2), b.max(p.3)));
    let (x0, x1) = if x1 > x0 { (x0 - 0.5, x1 + 0.5) } else { (x0 - 1.0, x0 + 1.0) };
    let (y0, y1) = if y1 > y0 { (y0 - 0.5, y1 + 0.5) } else { (y0 - 1.0, y0 + 1.0) };
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{a:.2},{b:.2} L{a:.2},{c:.2} L{d:.2},{c:.2}" stroke="black" fill="none"/>"#,
        a = pad,
        b = pad,
        c = h - pad,
        d = w - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">log2 N</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="13" transform="rotate(-90 15 {:.2})" text-anchor="middle">log2 L2</text>"#,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="30" font-size="14">{}: slope {:.4} ± {:.4}, predicted {:.4}</text>"#,
        xml_escape(&report.name),
        report.fit.slope,
        report.fit.slope_stderr,
        report.prediction.exponent
    );
    for (i, r) in report.rows.iter().filter(|r| r.value > 0.0).enumerate() {
        let (x, y, lo, hi) = pts[i];
        let fill = if r.in_fit { "black" } else { "none" };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
            sx(x),
            sy(lo),
            sx(x),
            sy(hi)
        );
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"/>"#, sx(x), sy(y));
    }
    let f = &report.fit;
    let line = |slope: f64, at: (f64, f64), color: &str, dash: &str| {
        let ya = at.1 + slope * (x0 - at.0);
        let yb = at.1 + slope * (x1 - at.0);
        format!(
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="{dash}"/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        )
    };
    let mid = (0.5 * (x0 + x1), f.intercept + f.slope * 0.5 * (x0 + x1));
    let _ = writeln!(s, "{}", line(f.slope, mid, "steelblue", "none"));
    let _ = writeln!(s, "{}", line(report.prediction.exponent, mid, "firebrick", "6,4"));
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `{ "configs": ["a.json", ...] }`, paths relative to the manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub configs: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub slope: f64,
    pub slope_stderr: f64,
    pub target: f64,
    pub tolerance: f64,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSummary {
    pub rows: Vec<SummaryRow>,
    pub path: PathBuf,
}

impl SuiteSummary {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == "PASS")
    }
}

/// Runs every config of a manifest (in parallel) and writes
/// `summary.csv` to `out`, one verdict row per config in manifest order.
/// Each config's own outputs go under `out/<name>` unless it names a
/// directory.
pub fn run_suite(manifest: &Path, out: &Path) -> Result<SuiteSummary> {
    let text = std::fs::read_to_string(manifest).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => LabError::MissingConfig(manifest.to_path_buf()),
        _ => e.into(),
    })?;
    let m: Manifest = serde_json::from_str(&text)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let configs = m
        .configs
        .iter()
        .map(|p| {
            let mut c = ExperimentConfig::load(&base.join(p))?;
            if c.output.is_none() {
                c.output = Some(out.join(&c.name));
            } else if let Some(o) = &c.output {
                c.output = Some(base.join(o));
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = configs.par_iter().map(|c| run_experiment(c, base)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<SummaryRow> = reports
        .iter()
        .map(|r| {
            let v = &r.verdicts[0];
            SummaryRow {
                name: r.name.clone(),
                slope: r.fit.slope,
                slope_stderr: r.fit.slope_stderr,
                target: v.target,
                tolerance: v.tolerance,
                verdict: if r.pass { "PASS" } else { "FAIL" }.into(),
            }
        })
        .collect();
    std::fs::create_dir_all(out)?;
    let path = out.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    if rows.is_empty() {
        w.write_record(["name", "slope", "slope_stderr", "target", "tolerance", "verdict"])?;
    }
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(SuiteSummary { rows, path })
}

#[cfg(test)]
mod tests;
