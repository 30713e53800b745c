use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{AffinePose, Shape};
use crate::measure::{evaluate, MapDescriptor, MeasureSpec};

fn square() -> PreparedMeasure {
    MeasureSpec::lebesgue(Shape::unit_square()).prepare().unwrap()
}

fn supported() -> Vec<PreparedMeasure> {
    vec![
        square(),
        MeasureSpec::lebesgue(Shape::ball(0.5)).prepare().unwrap(),
        MeasureSpec::lebesgue(Shape::KochRegion { level: 4 }).prepare().unwrap(),
        MeasureSpec::lebesgue(Shape::ConvexPolygon {
            vertices: (0..6).map(|k| [(k as f64 * PI / 3.0).cos(), (k as f64 * PI / 3.0).sin()]).collect(),
        })
        .prepare()
        .unwrap(),
        MeasureSpec::koch_curve(4).prepare().unwrap(),
        MeasureSpec::circle(1.0).prepare().unwrap(),
        MeasureSpec::sphere(1.0).prepare().unwrap(),
    ]
}

#[test]
fn iid_points_are_seeded_and_in_support() {
    let mu = square();
    let one = iid_points(&mu, 1, 0).unwrap();
    assert_eq!(one.len(), 1);
    assert!(one.points()[0].x.abs() <= 0.5 && one.points()[0].y.abs() <= 0.5);
    let a = iid_points(&mu, 1000, 1).unwrap();
    let b = iid_points(&mu, 1000, 2).unwrap();
    assert_ne!(a.points(), b.points());
    assert_eq!(a.generator(), Generator::Iid);
    assert!(iid_points(&mu, 0, 0).is_err());
}

#[test]
fn iid_discrepancy_has_binomial_variance() {
    let mu = square();
    let ball = Shape::ball(0.3).prepare().unwrap();
    let pose = AffinePose::planar(0.1, -0.05, 1.0, 0.0);
    let m = evaluate(mu.spec(), ball.shape(), &pose).unwrap().value;
    let n = 50usize;
    let d2: Vec<f64> = (0..200u64)
        .map(|s| {
            let p = iid_points(&mu, n, 1000 + s).unwrap();
            let c = p.points().iter().filter(|z| ball.contains(&pose, z)).count() as f64;
            (c - n as f64 * m).powi(2)
        })
        .collect();
    let s = crate::stats::mean_se(&d2);
    let want = n as f64 * m * (1.0 - m);
    assert!((s.mean - want).abs() <= 3.0 * s.stderr, "{} ± {} vs {want}", s.mean, s.stderr);
}

#[test]
fn square_partition_with_perfect_square_is_the_grid() {
    let k = 7;
    let p = partition_points(&square(), k * k, 0).unwrap();
    let mut want: Vec<(i64, i64)> = Vec::new();
    for j in 0..k {
        for i in 0..k {
            want.push(((2 * i + 1) as i64, (2 * j + 1) as i64));
        }
    }
    for (pt, (i, j)) in p.points().iter().zip(want) {
        let x = -0.5 + i as f64 / (2 * k) as f64;
        let y = -0.5 + j as f64 / (2 * k) as f64;
        assert!((pt.x - x).abs() < 1e-15 && (pt.y - y).abs() < 1e-15, "{pt:?} vs {x},{y}");
    }
}

#[test]
fn koch_curve_full_partition_hits_segment_midpoints() {
    let mu = MeasureSpec::koch_curve(8).prepare().unwrap();
    let n = 3 * 4usize.pow(8);
    let part = equal_measure_partition(&mu, n).unwrap();
    let c = mu.curve().unwrap();
    for (i, cell) in part.cells.iter().enumerate().step_by(997) {
        let (a, b) = c.segment(i);
        assert!((cell.representative.xy() - (a + b) / 2.0).norm() < 1e-12);
        assert!((cell.measure - 1.0 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn circle_partition_is_equispaced() {
    let mu = MeasureSpec::circle(1.0).prepare().unwrap();
    let p = partition_points(&mu, 100, 0).unwrap();
    for (j, z) in p.points().iter().enumerate() {
        let t = 2.0 * PI * j as f64 / 100.0;
        assert!((z.x - t.cos()).abs() < 1e-15 && (z.y - t.sin()).abs() < 1e-15);
    }
}

#[test]
fn cells_have_equal_measure_and_hold_their_points() {
    for mu in supported() {
        for n in [1usize, 2, 3, 7, 64, 100] {
            let part = equal_measure_partition(&mu, n).unwrap();
            assert_eq!(part.cells.len(), n, "{}", mu.spec().id());
            let total: f64 = part.cells.iter().map(|c| c.measure).sum();
            assert!((total - 1.0).abs() < 1e-9, "{} n={n}: {total}", mu.spec().id());
            for c in &part.cells {
                assert!((c.measure - 1.0 / n as f64).abs() < 1e-9, "{} n={n}: {}", mu.spec().id(), c.measure);
                assert!(c.contains(&c.representative), "{} n={n}: {:?}", mu.spec().id(), c.representative);
                assert!(c.diameter <= part.max_diameter);
            }
        }
    }
}

// Counting iid draws per cell checks coverage and measures without reusing
// the partition's own area arithmetic.
#[test]
fn cells_cover_the_support_with_binomial_counts() {
    let m = 40_000usize;
    let n = 10usize;
    for (k, mu) in supported().into_iter().enumerate() {
        let part = equal_measure_partition(&mu, n).unwrap();
        let sample = mu.sample(m, 77 + k as u64).unwrap();
        let mut counts = vec![0usize; n];
        for z in sample.points() {
            let hit = part.cells.iter().position(|c| c.contains(z));
            counts[hit.unwrap_or_else(|| panic!("{}: {z:?} in no cell", mu.spec().id()))] += 1;
        }
        let mean = m as f64 / n as f64;
        let sd = (mean * (1.0 - 1.0 / n as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 4.5 * sd, "{}: {c} vs {mean}", mu.spec().id());
        }
    }
}

#[test]
fn diameter_constant_is_stable_across_dyadic_sizes() {
    for mu in supported() {
        let cs: Vec<f64> = [64usize, 256, 1024]
            .iter()
            .map(|&n| equal_measure_partition(&mu, n).unwrap().constant)
            .collect();
        let (lo, hi) = cs.iter().fold((f64::MAX, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
        assert!(hi / lo < 2.0, "{}: {cs:?}", mu.spec().id());
    }
}

#[test]
fn jittered_points_stay_in_their_cells() {
    for mu in supported() {
        let part = equal_measure_partition(&mu, 37).unwrap();
        let a = partition_points_with(&mu, 37, 5, &PartitionOptions { jitter: true }).unwrap();
        let b = partition_points_with(&mu, 37, 5, &PartitionOptions { jitter: true }).unwrap();
        assert_eq!(a, b);
        for (c, z) in part.cells.iter().zip(a.points()) {
            assert!(c.contains(z), "{}: {z:?}", mu.spec().id());
        }
    }
}

#[test]
fn unsupported_measures_are_named() {
    let mu = MeasureSpec::lebesgue(Shape::RectangleUnionGamma { beta: 0.5, truncation: Some(100) }).prepare().unwrap();
    assert!(matches!(partition_points(&mu, 10, 0), Err(LabError::UnsupportedPartition(_))));
    let push = MeasureSpec::pushforward(
        MeasureSpec::circle(1.0),
        MapDescriptor::RadialGraph { amplitude: 0.1, frequency: 2 },
        0.5,
    )
    .prepare()
    .unwrap();
    let e = partition_points(&push, 10, 0).unwrap_err();
    assert!(e.to_string().contains("Koch curve"));
}

#[test]
fn equispaced_circle_basics() {
    let p = equispaced_circle(4).unwrap();
    let r = UNIT_CIRCUMFERENCE_RADIUS;
    let want = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)];
    for (z, (x, y)) in p.points().iter().zip(want) {
        assert!((z.x - x).abs() < 1e-15 && (z.y - y).abs() < 1e-15);
    }
    assert!(equispaced_circle(0).is_err());
    assert_eq!(p.generator(), Generator::EquispacedCircle);
}

#[test]
fn equispaced_circle_ball_and_halfplane_discrepancy_is_at_most_one() {
    let n = 37;
    let pts = equispaced_circle(n).unwrap();
    let mu = MeasureSpec::circle(UNIT_CIRCUMFERENCE_RADIUS);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    use rand::Rng;
    for _ in 0..1000 {
        let pose = AffinePose::planar(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), rng.gen_range(0.01..0.4), 0.0);
        let ball = Shape::ball(1.0);
        let body = ball.prepare().unwrap();
        let c = pts.points().iter().filter(|z| body.contains(&pose, z)).count() as f64;
        let d = c - n as f64 * evaluate(&mu, &ball, &pose).unwrap().value;
        assert!(d.abs() <= 1.0 + 1e-12, "{d}");

        let h = Shape::half_plane(rng.gen_range(0.0..2.0 * PI), rng.gen_range(-0.2..0.2));
        let body = h.prepare().unwrap();
        let id = AffinePose::identity(Dim::Two);
        let c = pts.points().iter().filter(|z| body.contains(&id, z)).count() as f64;
        let d = c - n as f64 * evaluate(&mu, &h, &id).unwrap().value;
        assert!(d.abs() <= 1.0 + 1e-12, "{d}");
    }
}

#[test]
fn csv_and_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.csv");
    let p = partition_points(&MeasureSpec::sphere(1.0).prepare().unwrap(), 20, 3).unwrap();
    let side = p.save(&path).unwrap();
    assert!(side.ends_with("pts.json"));
    let q = PointSet::load(&path).unwrap();
    assert_eq!(p, q);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,y,z\n"));

    let mut buf = Vec::new();
    equispaced_circle(3).unwrap().write_csv(&mut buf).unwrap();
    let back = PointSet::read_csv(&buf[..]).unwrap();
    assert_eq!(back.generator(), Generator::External);
    assert_eq!(back.points(), equispaced_circle(3).unwrap().points());
    assert!(matches!(PointSet::load(&dir.path().join("missing.csv")), Err(LabError::MissingConfig(_))));
}

#[test]
fn points_outside_the_support_ball_are_reported() {
    let p = PointSet::new(Dim::Two, vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)], Generator::External, None, None)
        .unwrap();
    assert!(matches!(p.check_within(1.0), Err(LabError::PointOutsideSupport { index: 1, .. })));
    assert!(p.check_within(2.0).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn partition_invariants_hold_for_any_size(n in 1usize..300, which in 0usize..7) {
        let mu = &supported()[which];
        let part = equal_measure_partition(mu, n).unwrap();
        prop_assert_eq!(part.cells.len(), n);
        let total: f64 = part.cells.iter().map(|c| c.measure).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for c in &part.cells {
            prop_assert!((c.measure - 1.0 / n as f64).abs() < 1e-9);
            prop_assert!(c.contains(&c.representative));
        }
        let pts = partition_points(mu, n, 0).unwrap();
        prop_assert!(pts.check_within(mu.support_radius() * (1.0 + 1e-12)).is_ok());
    }
}
