use super::*;
use crate::stats::wls;

fn square_disk(generator: GeneratorSpec, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        name: "square-disk".into(),
        measure: MeasureSpec::lebesgue(Shape::unit_square()),
        family: FamilyConfig::Affine { shape: Shape::ball(1.0), a: 0.1, b: 0.3 },
        generator,
        n_list: vec![16, 32, 64, 128],
        poses: 1000,
        seed: 3,
        output: Some(out.to_path_buf()),
        rule: SlopeRule::default(),
        fallback_atoms: None,
    }
}

fn row(n: usize, value: f64, stderr: f64) -> ExperimentRow {
    ExperimentRow { n, value, stderr, n_poses: 1, seed: 0, in_fit: true }
}

#[test]
fn predictions_follow_the_generator() {
    let dir = Path::new("unused");
    let mut c = square_disk(GeneratorSpec::Iid, dir);
    let mu = c.measure.prepare().unwrap();
    assert_eq!(predict(&c, &mu).unwrap().exponent, 0.5);
    c.generator = GeneratorSpec::Partition { jitter: false };
    assert!((predict(&c, &mu).unwrap().exponent - 0.25).abs() < 1e-15);

    let koch = MeasureSpec::lebesgue(Shape::KochRegion { level: 8 });
    let c = ExperimentConfig {
        measure: koch.clone(),
        family: FamilyConfig::Affine { shape: Shape::KochRegion { level: 8 }, a: 0.1, b: 0.3 },
        ..square_disk(GeneratorSpec::Partition { jitter: false }, dir)
    };
    let p = predict(&c, &koch.prepare().unwrap()).unwrap();
    let want = (4f64.ln() / 3f64.ln()) / 4.0;
    assert!((p.exponent - want).abs() < 1e-12, "{} vs {want}", p.exponent);

    let arc = MeasureSpec::circle(1.0);
    let c = ExperimentConfig {
        measure: arc.clone(),
        family: FamilyConfig::HalfSpace,
        ..square_disk(GeneratorSpec::EquispacedCircle, dir)
    };
    let p = predict(&c, &arc.prepare().unwrap()).unwrap();
    assert_eq!((p.beta, p.exponent), (1.0, 0.0));
    assert!(p.provenance.contains("lower bound"));
}

#[test]
fn config_validation() {
    let dir = Path::new("unused");
    let mut c = square_disk(GeneratorSpec::Iid, dir);
    assert!(c.validate().is_ok());
    c.n_list = vec![16, 32, 64];
    assert!(c.validate().is_err());
    c.n_list = vec![16, 32, 32, 64];
    assert!(c.validate().is_err());
    c.n_list = vec![0, 2, 4, 8];
    assert!(c.validate().is_err());
    let c = ExperimentConfig {
        family: FamilyConfig::Affine { shape: Shape::KochCurvePolyline { level: 3 }, a: 0.1, b: 0.3 },
        ..square_disk(GeneratorSpec::Iid, dir)
    };
    assert!(compute_report(&c, dir).is_err());
}

#[test]
fn config_json_uses_defaults() {
    let text = r#"{
        "name": "x",
        "measure": {"variant": "LebesgueOnShape", "support": {"variant": "Ball", "radius": 0.5, "dim": 2}, "alpha": 2.0},
        "family": {"kind": "half-space"},
        "generator": {"kind": "partition"},
        "n_list": [8, 16, 32, 64],
        "poses": 10
    }"#;
    let c: ExperimentConfig = serde_json::from_str(text).unwrap();
    assert_eq!(c.generator, GeneratorSpec::Partition { jitter: false });
    assert_eq!(c.rule, SlopeRule::default());
    assert_eq!(c.seed, 0);
    assert_eq!(c.output_dir(), Path::new("out").join("x"));
    let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn fit_matches_a_direct_weighted_regression() {
    let mut rows: Vec<ExperimentRow> =
        [(8usize, 1.9, 0.2), (16, 2.9, 0.1), (32, 4.1, 0.3), (64, 5.5, 0.2)].iter().map(|&(n, v, s)| row(n, v, s)).collect();
    let f = fit_rows(&mut rows).unwrap();
    assert!(rows.iter().all(|r| r.in_fit));
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).log2()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.value.log2()).collect();
    let w: Vec<f64> = rows.iter().map(|r| (r.value * std::f64::consts::LN_2 / r.stderr).powi(2)).collect();
    let direct = wls(&x, &y, &w);
    assert!((f.slope - direct.slope).abs() < 1e-12);
    assert!((f.slope_stderr - direct.slope_stderr).abs() < 1e-12);

    // Exact power law: the fit recovers it whatever the weights.
    let mut rows: Vec<ExperimentRow> = (3..9).map(|k| row(1 << k, 0.7 * (1 << k) as f64, 0.01)).collect();
    assert!((fit_rows(&mut rows).unwrap().slope - 1.0).abs() < 1e-12);
}

#[test]
fn noisy_smallest_size_is_left_out() {
    let mut rows = vec![row(8, 10.0, 2.6), row(16, 1.0, 0.01), row(32, 2.0, 0.02), row(64, 4.0, 0.04)];
    let f = fit_rows(&mut rows).unwrap();
    assert!(!rows[0].in_fit && rows[1..].iter().all(|r| r.in_fit));
    assert!((f.slope - 1.0).abs() < 1e-12);
    // At exactly 25% the row stays.
    let mut rows = vec![row(8, 0.5, 0.125), row(16, 1.0, 0.01), row(32, 2.0, 0.02), row(64, 4.0, 0.04)];
    fit_rows(&mut rows).unwrap();
    assert!(rows[0].in_fit);
    // Only the smallest N is ever excluded by the rule.
    let mut rows = vec![row(8, 0.5, 0.01), row(16, 1.0, 0.9), row(32, 2.0, 0.02), row(64, 4.0, 0.04)];
    fit_rows(&mut rows).unwrap();
    assert!(rows.iter().all(|r| r.in_fit));
}

#[test]
fn experiment_writes_its_three_outputs_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let c = square_disk(GeneratorSpec::Iid, &dir.path().join("a"));
    let r = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(r.rows.len(), 4);
    for f in ["report.json", "rows.csv", "plot.svg"] {
        assert!(dir.path().join("a").join(f).is_file(), "{f}");
    }
    let rows = std::fs::read_to_string(dir.path().join("a/rows.csv")).unwrap();
    assert!(rows.starts_with("N,value,stderr,n_poses,seed,in_fit\n"), "{rows}");
    assert_eq!(rows.lines().count(), 5);
    let svg = std::fs::read_to_string(dir.path().join("a/plot.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 4);
    assert_eq!(svg.matches("stroke=\"gray\"").count(), 4, "one stderr bar per point");
    assert!(svg.contains("steelblue") && svg.contains("firebrick"));
    let back: ExperimentReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(back, r);

    let before: Vec<Vec<u8>> =
        ["report.json", "rows.csv", "plot.svg"].iter().map(|f| std::fs::read(dir.path().join("a").join(f)).unwrap()).collect();
    run_experiment(&c, dir.path()).unwrap();
    for (f, b) in ["report.json", "rows.csv", "plot.svg"].iter().zip(before) {
        assert_eq!(std::fs::read(dir.path().join("a").join(f)).unwrap(), b, "{f}");
    }
}

#[test]
fn stage_errors_name_the_size() {
    let dir = tempfile::tempdir().unwrap();
    let c = ExperimentConfig {
        measure: MeasureSpec::lebesgue(Shape::RectangleUnionGamma { beta: 0.5, truncation: Some(50) }),
        family: FamilyConfig::Affine { shape: Shape::ball(1.0), a: 0.1, b: 0.3 },
        ..square_disk(GeneratorSpec::Partition { jitter: false }, &dir.path().join("x"))
    };
    let e = compute_report(&c, dir.path()).unwrap_err();
    match e {
        LabError::Stage { n, ref stage, .. } => assert_eq!((n, stage.as_str()), (16, "point generation")),
        other => panic!("{other}"),
    }
    assert!(e.to_string().contains("N = 16"));
}

#[test]
fn csv_generator_reads_one_file_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let mu = MeasureSpec::lebesgue(Shape::unit_square()).prepare().unwrap();
    for n in [16usize, 32, 64, 128] {
        iid_points(&mu, n, 9).unwrap().save(&dir.path().join(format!("pts-{n}.csv"))).unwrap();
    }
    let c = square_disk(GeneratorSpec::Csv { path: "pts-{N}.csv".into() }, &dir.path().join("out"));
    let from_csv = compute_report(&c, dir.path()).unwrap();
    assert_eq!(from_csv.rows.len(), 4);
    let c = ExperimentConfig { n_list: vec![16, 32, 64, 256], ..c };
    assert!(matches!(compute_report(&c, dir.path()), Err(LabError::Stage { n: 256, .. })));
}

fn write_config(dir: &Path, file: &str, c: &ExperimentConfig) {
    std::fs::write(dir.join(file), serde_json::to_string_pretty(c).unwrap()).unwrap();
}

#[test]
fn empty_manifest_gives_an_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"configs": []}"#).unwrap();
    let s = run_suite(&m, &dir.path().join("out")).unwrap();
    assert!(s.rows.is_empty() && s.all_pass());
    let text = std::fs::read_to_string(&s.path).unwrap();
    assert_eq!(text, "name,slope,slope_stderr,target,tolerance,verdict\n");
}

#[test]
fn failing_tolerance_marks_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut good = square_disk(GeneratorSpec::Iid, Path::new("unused"));
    good.output = None;
    good.rule = SlopeRule { target: Some(0.5), tolerance: 0.3 };
    let bad = ExperimentConfig {
        name: "impossible".into(),
        rule: SlopeRule { target: Some(5.0), tolerance: 0.01 },
        ..good.clone()
    };
    write_config(dir.path(), "good.json", &good);
    write_config(dir.path(), "bad.json", &bad);
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"configs": ["good.json", "bad.json"]}"#).unwrap();
    let s = run_suite(&m, &dir.path().join("out")).unwrap();
    assert!(!s.all_pass());
    assert_eq!(s.rows.iter().map(|r| r.verdict.as_str()).collect::<Vec<_>>(), ["PASS", "FAIL"]);
    assert!(dir.path().join("out/impossible/rows.csv").is_file());

    let first = std::fs::read(&s.path).unwrap();
    let rows = std::fs::read(dir.path().join("out/square-disk/rows.csv")).unwrap();
    run_suite(&m, &dir.path().join("out")).unwrap();
    assert_eq!(std::fs::read(&s.path).unwrap(), first);
    assert_eq!(std::fs::read(dir.path().join("out/square-disk/rows.csv")).unwrap(), rows);
}

#[test]
fn missing_configs_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"configs": ["nope.json"]}"#).unwrap();
    let e = run_suite(&m, dir.path()).unwrap_err();
    assert!(matches!(e, LabError::MissingConfig(ref p) if p.ends_with("nope.json")), "{e}");
    assert!(e.to_string().contains("nope.json"));
    assert!(matches!(run_suite(&dir.path().join("absent.json"), dir.path()), Err(LabError::MissingConfig(_))));
}
