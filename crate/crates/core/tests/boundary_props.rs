mod common;

use common::*;
use proptest::prelude::*;
use starbound::boundary::{
    approx_horofunction, busemann, default_probes, horoball_dualstar_check, metric_functional_of_point, Horoball,
};
use starbound::spaces::{geodesic_ray, Chart, ModelSpace, Norm, Point};
use starbound::stars::StarBudget;

fn busemann_spaces() -> Vec<ModelSpace> {
    vec![ModelSpace::disk(), ModelSpace::ball(2).unwrap(), ModelSpace::normed(3, Norm::L2).unwrap(), ModelSpace::half_plane()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functionals_are_one_lipschitz(seed in any::<u64>()) {
        let mut r = rng(seed);
        for s in busemann_spaces() {
            let ch = Chart::new(&s);
            let fs = [
                busemann(&s, &ch.sample_boundary(&mut r).unwrap()).unwrap(),
                metric_functional_of_point(&s, &sample(&s, &mut r, 0.9)).unwrap(),
            ];
            for f in &fs {
                for _ in 0..50 {
                    let (x, y) = (sample(&s, &mut r, 0.95), sample(&s, &mut r, 0.95));
                    let gap = (f.evaluate(&x).unwrap() - f.evaluate(&y).unwrap()).abs() - dist(&s, &x, &y);
                    prop_assert!(gap <= 1e-8, "{}: {gap}", s.name());
                }
            }
        }
    }

    #[test]
    fn horoballs_are_nested(seed in any::<u64>(), c1 in -3.0..3.0f64, c2 in -3.0..3.0f64) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let mut r = rng(seed);
        for s in busemann_spaces() {
            let h = busemann(&s, &Chart::new(&s).sample_boundary(&mut r).unwrap()).unwrap();
            let (small, big) = (Horoball { functional: h.clone(), level: lo }, Horoball { functional: h, level: hi });
            for _ in 0..50 {
                let y = sample(&s, &mut r, 0.95);
                prop_assert!(!small.contains(&y).unwrap() || big.contains(&y).unwrap());
            }
        }
    }
}

#[test]
fn busemann_matches_ray_limits() {
    let mut r = rng(11);
    for s in busemann_spaces() {
        let ch = Chart::new(&s);
        let hyperbolic = !matches!(s.kind, starbound::spaces::SpaceKind::NormedSpace { .. });
        let probes = default_probes(&s, 3);
        for _ in 0..10 {
            let xi = ch.sample_boundary(&mut r).unwrap();
            let ray = geodesic_ray(&s, &s.basepoint, &xi).unwrap();
            let seq: Vec<Point> = (0..=30).map(|k| ray.at(if hyperbolic { 0.5 * k as f64 } else { 1.5f64.powi(k) })).collect();
            let (approx, diag) = approx_horofunction(&s, &seq, &probes, 1e-3).unwrap();
            assert!(!diag.bounded);
            let b = busemann(&s, &xi).unwrap();
            for p in &probes {
                let e = (approx.evaluate(p).unwrap() - b.evaluate(p).unwrap()).abs();
                assert!(e < 1e-4, "{}: {e}", s.name());
            }
        }
    }
}

#[test]
fn horoball_accumulation_lies_in_dual_star() {
    let mut r = rng(5);
    for s in [ModelSpace::disk(), ModelSpace::ball(2).unwrap(), ModelSpace::normed(2, Norm::L2).unwrap()] {
        let ch = Chart::new(&s);
        let xi = ch.sample_boundary(&mut r).unwrap();
        let samples: Vec<_> = (0..8).map(|_| ch.sample_boundary(&mut r).unwrap()).chain([xi.clone()]).collect();
        let rep = horoball_dualstar_check(&s, &xi, 0.0, &samples, &StarBudget::default()).unwrap();
        assert!(rep.violations.is_empty(), "{}: {:?}", s.name(), rep.violations);
        assert!(rep.accumulating >= 1);
    }
}
