//! `lab`: runs discrepancy experiments from JSON configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irregularities::experiment::{run_experiment, run_suite, ExperimentConfig, ExperimentReport};
use irregularities::geometry::{fit_beta, Shape, Vec3};
use irregularities::measure::MeasureSpec;
use irregularities::pointset::{iid_points, partition_points};
use irregularities::spectral::{cassels_montgomery, dyadic_shells, write_rows_csv, CasselsQuad, SpectralGrid};
use irregularities::{LabError, Result};

#[derive(Parser)]
#[command(name = "lab", version, about = "Discrepancy experiments: sweeps, suites and spectral probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the seed of every run
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the Monte Carlo pose budget
    #[arg(long, global = true)]
    poses: Option<usize>,

    /// Print only errors and verdicts
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config
    Run { config: PathBuf },

    /// Run every config listed in a manifest and write summary.csv
    Suite { manifest: PathBuf },

    /// Fit the symmetric-difference exponent of a shape
    FitBeta {
        /// Shape as JSON or a shortcut (square, disk, snowflake[:level])
        shape: String,
        /// Direction angle of the shifts, radians
        #[arg(long, default_value_t = 0.3)]
        angle: f64,
        /// First shift t₁
        #[arg(long, default_value_t = 3f64.sqrt() / 6.0)]
        t1: f64,
        /// Ratio t_{n+1}/t_n
        #[arg(long, default_value_t = 1.0 / 3.0)]
        ratio: f64,
        /// Number of shifts
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Samples per area estimate when no exact path exists
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },

    /// Dyadic shell energies of a shape's indicator on an FFT grid
    Spectrum {
        shape: String,
        /// Grid size (power of two)
        #[arg(long, default_value_t = 1024)]
        size: usize,
        /// Radius of the innermost ball
        #[arg(long, default_value_t = 1.0)]
        rho0: f64,
    },

    /// Exponential-sum integral over 1 ≤ |ξ| ≤ M
    Cassels {
        /// Measure as JSON or a shortcut (square, disk, snowflake[:level], koch-curve[:level], circle, sphere)
        measure: String,
        #[arg(short = 'n', long)]
        points: usize,
        #[arg(short = 'm', long)]
        cutoff: f64,
        #[arg(long, value_enum, default_value = "iid")]
        generator: PointKind,
        /// Lattice spacing; chosen from the point spread when absent
        #[arg(long)]
        spacing: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PointKind {
    Iid,
    Partition,
}

fn level(s: &str, default: u32) -> Result<u32> {
    match s.split_once(':') {
        Some((_, l)) => l.parse().map_err(|_| LabError::InvalidArgument(format!("bad level in {s:?}"))),
        None => Ok(default),
    }
}

fn parse_shape(s: &str) -> Result<Shape> {
    if s.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    match s.split(':').next().unwrap_or_default() {
        "square" => Ok(Shape::unit_square()),
        "disk" => Ok(Shape::ball(0.5)),
        "snowflake" => Ok(Shape::KochRegion { level: level(s, 8)? }),
        _ => Err(LabError::InvalidShape(format!("unknown shape {s:?}; use JSON or square, disk, snowflake[:level]"))),
    }
}

fn parse_measure(s: &str) -> Result<MeasureSpec> {
    if s.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    match s.split(':').next().unwrap_or_default() {
        "koch-curve" => Ok(MeasureSpec::koch_curve(level(s, 8)?)),
        "circle" => Ok(MeasureSpec::circle(1.0)),
        "sphere" => Ok(MeasureSpec::sphere(1.0)),
        _ => parse_shape(s).map(MeasureSpec::lebesgue),
    }
}

fn print_report(r: &ExperimentReport, quiet: bool) {
    if !quiet {
        println!("{:>8}  {:>12}  {:>10}  fit", "N", "L2", "stderr");
        for row in &r.rows {
            println!("{:>8}  {:>12.6}  {:>10.6}  {}", row.n, row.value, row.stderr, if row.in_fit { "yes" } else { "no" });
        }
        println!("prediction {:.4} ({})", r.prediction.exponent, r.prediction.provenance);
    }
    let v = &r.verdicts[0];
    println!(
        "{}: slope {:.4} ± {:.4}, target {:.4} ± {} → {}",
        r.name,
        r.fit.slope,
        r.fit.slope_stderr,
        v.target,
        v.tolerance,
        if r.pass { "PASS" } else { "FAIL" }
    );
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>, file: &str) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file), text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Run { config } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            if let Some(p) = cli.poses {
                c.poses = p;
            }
            if let Some(o) = cli.out {
                c.output = Some(o);
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let r = run_experiment(&c, base)?;
            print_report(&r, cli.quiet);
            Ok(r.pass)
        }
        Command::Suite { manifest } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("out"));
            let s = run_suite(&manifest, &out)?;
            for r in &s.rows {
                if !cli.quiet || r.verdict != "PASS" {
                    println!("{:<32} slope {:.4} ± {:.4} target {:.4} {}", r.name, r.slope, r.slope_stderr, r.target, r.verdict);
                }
            }
            if !cli.quiet {
                println!("summary: {}", s.path.display());
            }
            Ok(s.all_pass())
        }
        Command::FitBeta { shape, angle, t1, ratio, count, samples } => {
            let shape = parse_shape(&shape)?;
            let ts: Vec<f64> = (0..count).map(|k| t1 * ratio.powi(k as i32)).collect();
            let fit = fit_beta(&shape, &Vec3::new(angle.cos(), angle.sin(), 0.0), &ts, samples, seed)?;
            if !cli.quiet {
                for r in &fit.rows {
                    eprintln!("t = {:.6e}  |△| = {:.6e} ± {:.1e}", r.t, r.volume, r.stderr);
                }
            }
            eprintln!("β̂ = {:.4} ± {:.4}", fit.beta_hat, fit.beta_stderr);
            write_json(&fit, cli.out.as_deref(), "beta.json")?;
            Ok(true)
        }
        Command::Spectrum { shape, size, rho0 } => {
            let grid = SpectralGrid::auto(&parse_shape(&shape)?, size)?;
            let rows = dyadic_shells(&grid, rho0)?;
            if !cli.quiet {
                eprintln!("side {} cell {:.3e} nyquist {:.1} parseval gap {:.2e}", grid.side(), grid.cell(), grid.nyquist(), grid.parseval_gap());
            }
            match cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    write_rows_csv(&rows, &dir.join("shells.csv"))?;
                }
                None => {
                    println!("lo,hi,energy");
                    for r in rows {
                        println!("{},{},{}", r.lo, r.hi, r.energy);
                    }
                }
            }
            Ok(true)
        }
        Command::Cassels { measure, points, cutoff, generator, spacing } => {
            let mu = parse_measure(&measure)?.prepare()?;
            let pts = match generator {
                PointKind::Iid => iid_points(&mu, points, seed)?,
                PointKind::Partition => partition_points(&mu, points, seed)?,
            };
            let quad = spacing.map_or_else(|| CasselsQuad::auto(&pts), |spacing| CasselsQuad { spacing });
            let v = cassels_montgomery(&pts, &mu, cutoff, &quad)?;
            if !cli.quiet {
                let d = mu.dim().get() as i32;
                eprintln!("I/(N·M^d) = {:.4}", v.value / (points as f64 * cutoff.powi(d)));
            }
            write_json(&v, cli.out.as_deref(), "cassels.json")?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: LAB_THREADS ignored: {e}");
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(2)
        }
    }
}
