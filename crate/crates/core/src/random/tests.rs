use super::*;
use crate::dynamics::mobius;
use crate::spaces::{BoundaryPoint, ModelSpace};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn constant(v: f64) -> CoefficientLaw {
    CoefficientLaw::Constant { value: v }
}

pub(crate) fn two_map_battery() -> MapDistribution {
    let s = (0.75f64).sqrt();
    let f1: Mat2 = [[c(1.0 / s, 0.0), c(0.5 / s, 0.0)], [c(0.5 / s, 0.0), c(1.0 / s, 0.0)]];
    let f2: Mat2 = [[c(1.0 / s, 0.0), c(0.0, 0.5 / s)], [c(0.0, -0.5 / s), c(1.0 / s, 0.0)]];
    MapDistribution::FiniteSupport {
        space: ModelSpace::disk(),
        maps: vec![MapSpec::MobiusDisk { matrix: f1 }, MapSpec::MobiusDisk { matrix: f2 }],
        weights: vec![0.5, 0.5],
    }
}

fn single(matrix: Mat2) -> MapDistribution {
    MapDistribution::FiniteSupport { space: ModelSpace::disk(), maps: vec![MapSpec::MobiusDisk { matrix }], weights: vec![1.0] }
}

fn half() -> Mat2 {
    [[c(1.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]]
}

fn origin() -> Point {
    Point::Disk(c(0.0, 0.0))
}

#[test]
fn trajectories_are_reproducible() {
    let d = two_map_battery();
    let a = sample_trajectory(&d, 7, 200).unwrap();
    let b = sample_trajectory(&d, 7, 200).unwrap();
    assert_eq!(a.steps, b.steps);
    let other = sample_trial(&d, 7, 1, 200).unwrap();
    assert_ne!(a.steps, other.steps);
    let longer = sample_trial(&d, 7, 0, 300).unwrap();
    assert_eq!(&longer.steps[..200], &a.steps[..]);
}

#[test]
fn continued_fraction_fibonacci_ratio() {
    let d = MapDistribution::ContinuedFraction { a: constant(1.0), b: constant(1.0) };
    let t = sample_trajectory(&d, 0, 60).unwrap();
    let (mut f0, mut f1) = (0u64, 1u64);
    for n in 1..=40 {
        (f0, f1) = (f1, f0 + f1);
        let Value::Scalar(v) = evaluate_backward(&t, &Value::Scalar(0.0), n).unwrap() else { panic!() };
        let Value::Scalar(w) = t.evaluate_recursive(&Value::Scalar(0.0), n).unwrap() else { panic!() };
        assert!((v - f0 as f64 / f1 as f64).abs() < 1e-15 && (v - w).abs() < 1e-12);
    }
    let Value::Scalar(v) = evaluate_backward(&t, &Value::Scalar(0.0), 10).unwrap() else { panic!() };
    assert!((v - 55.0 / 89.0).abs() < 1e-15);
    assert_eq!(evaluate_backward(&t, &Value::Scalar(0.3), 0).unwrap(), Value::Scalar(0.3));
}

#[test]
fn classical_limits() {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let cf = classical_expansions(&MapDistribution::ContinuedFraction { a: constant(1.0), b: constant(1.0) }, 0, 50).unwrap();
    assert!((cf.last() - golden).abs() < 1e-10);
    let rad = classical_expansions(&MapDistribution::Radical { a: constant(0.0), b: constant(4.0) }, 0, 5).unwrap();
    assert!(rad.values.iter().all(|v| *v == 2.0));
    let tower = classical_expansions(&MapDistribution::IteratedExponential { a: constant(2f64.sqrt()) }, 0, 100).unwrap();
    assert!((tower.last() - 2.0).abs() < 1e-8 && tower.residual < 1e-8);
    let wild = MapDistribution::IteratedExponential { a: constant(2.0) };
    assert!(matches!(classical_expansions(&wild, 0, 10), Err(Error::Domain(_))));
}

#[test]
fn composed_products_match_recursion() {
    let d = two_map_battery();
    let t = sample_trajectory(&d, 7, 40).unwrap();
    assert!(t.has_composed());
    let x = Value::Point(Point::Disk(c(0.1, -0.2)));
    for n in 0..12 {
        let (Value::Point(Point::Disk(a)), Value::Point(Point::Disk(b))) =
            (evaluate_backward(&t, &x, n).unwrap(), t.evaluate_recursive(&x, n).unwrap())
        else {
            panic!()
        };
        assert!((a - b).norm() < 1e-10, "{n}: {a} {b}");
    }
}

#[test]
fn backward_product_identity_and_nonexpansiveness() {
    let d = two_map_battery();
    let t = sample_trajectory(&d, 3, 15).unwrap();
    let space = ModelSpace::disk();
    let x = Point::Disk(c(0.3, 0.1));
    let y = Point::Disk(c(-0.2, 0.4));
    for n in 0..14 {
        let fx = t.map(n + 1).unwrap().apply(&x).unwrap();
        let (Value::Point(a), Value::Point(b)) =
            (evaluate_backward(&t, &x.clone().into(), n + 1).unwrap(), evaluate_backward(&t, &fx.into(), n).unwrap())
        else {
            panic!()
        };
        assert!(space.d(&a, &b) < 1e-9);
        let (Value::Point(rx), Value::Point(ry)) =
            (evaluate_backward(&t, &x.clone().into(), n).unwrap(), evaluate_backward(&t, &y.clone().into(), n).unwrap())
        else {
            panic!()
        };
        assert!(space.d(&rx, &ry) <= space.d(&x, &y) + 1e-9);
    }
}

#[test]
fn deterministic_escape_rate() {
    let e = escape_rate(&single(half()), &origin(), 1000, 3, 1).unwrap();
    assert!((e.tau_hat - 0.5f64.atanh()).abs() < 1e-9);
    assert!(e.ci[0] <= e.median && e.median <= e.ci[1]);
    assert!(e.fekete.windows(2).all(|w| w[1] <= w[0]));
    let x = Point::Disk(c(0.3, -0.4));
    let e = escape_rate(&single(half()), &x, 300, 1, 1).unwrap();
    let direct = (0..300).fold(x.clone(), |p, _| {
        let Point::Disk(z) = p else { panic!() };
        Point::Disk(mobius::act(&half(), z))
    });
    let _ = direct;
    assert!((e.tau_hat - 0.5f64.atanh()).abs() < 1e-2);
}

#[test]
fn continued_fraction_escape_rate_vanishes() {
    let d = MapDistribution::ContinuedFraction { a: constant(1.0), b: constant(1.0) };
    let e = escape_rate(&d, &cone_point(1.0), 1000, 2, 0).unwrap();
    assert!(e.tau_hat < 1e-3);
}

#[test]
fn deterministic_random_denjoy_wolff() {
    let r = random_denjoy_wolff(&single(half()), &origin(), &Point::Disk(c(0.2, 0.5)), 200, 3, 1e-6, 0).unwrap();
    assert_eq!(r.decided_fraction, 1.0);
    assert!(r.max_gap < 1e-12 && r.limits_match && r.dual_star.is_none());
    assert_eq!(r.trials[0].xi, Some(BoundaryPoint::Disk(c(1.0, 0.0))));
}

#[test]
fn random_rotations_are_undecided() {
    let d = MapDistribution::FiniteSupport {
        space: ModelSpace::disk(),
        maps: vec![MapSpec::MobiusDisk { matrix: mobius::rotation(0.3) }, MapSpec::MobiusDisk { matrix: mobius::rotation(-1.1) }],
        weights: vec![0.5, 0.5],
    };
    let x = Point::Disk(c(0.5, 0.0));
    let r = random_denjoy_wolff(&d, &x, &origin(), 100, 10, 1e-6, 0).unwrap();
    assert_eq!(r.decided_fraction, 0.0);
    assert!(r.trials.iter().all(|t| t.interior));
    assert!(escape_rate(&d, &origin(), 100, 10, 0).unwrap().tau_hat < 1e-12);
}

#[test]
fn ergodic_certificate_deterministic_and_identity() {
    let r = ergodic_certificate(&single(half()), &origin(), 1000, 2, 0).unwrap();
    assert!(r.skipped == 0 && r.max_residual < 1e-6, "{r:?}");
    let r = ergodic_certificate(&single(half()), &Point::Disk(c(0.4, 0.3)), 1000, 1, 0).unwrap();
    assert!(r.max_residual < 1e-2, "{r:?}");
    let id = MapDistribution::FiniteSupport { space: ModelSpace::disk(), maps: vec![MapSpec::Identity], weights: vec![1.0] };
    let r = ergodic_certificate(&id, &origin(), 100, 2, 0).unwrap();
    assert!(r.skipped == 0 && r.max_residual == 0.0);
}

#[test]
fn two_map_battery_baseline() {
    let d = two_map_battery();
    let e = escape_rate(&d, &origin(), 500, 200, 7).unwrap();
    let r = random_denjoy_wolff(&d, &origin(), &Point::Disk(c(0.0, 0.5)), 500, 200, 1e-6, 7).unwrap();
    let g = ergodic_certificate(&d, &origin(), 1000, 50, 7).unwrap();
    assert!(e.excludes_zero() && (e.tau_hat - 0.44387).abs() < 1e-3);
    assert!(g.skipped == 0 && g.max_residual < 1e-2);
    assert!(r.decided_fraction >= 0.95 && r.max_gap < 1e-6 && r.limits_match);
}

#[test]
fn invalid_distributions() {
    let d = MapDistribution::FiniteSupport { space: ModelSpace::disk(), maps: vec![MapSpec::Identity], weights: vec![0.7] };
    assert!(matches!(d.check(), Err(Error::Invalid(_))));
    let d = MapDistribution::ContinuedFraction { a: constant(0.0), b: constant(1.0) };
    assert!(matches!(d.check(), Err(Error::Domain(_))));
    assert!(sample_trajectory(&two_map_battery(), 0, 0).is_err());
    assert!(two_map_battery().integrability(100, 0).unwrap().is_finite());
}
