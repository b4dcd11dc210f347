mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use starbound::spaces::{BoundaryPoint, Chart, ModelSpace, Norm};
use starbound::stars::{oracle_member, star_test, tits_angle, visibility_check, Outcome, StarBudget, Visibility};

fn oracle_spaces() -> Vec<ModelSpace> {
    vec![
        ModelSpace::disk(),
        ModelSpace::ball(2).unwrap(),
        ModelSpace::normed(2, Norm::L2).unwrap(),
        ModelSpace::normed(3, Norm::L2).unwrap(),
        square(),
        ModelSpace::simplex(3).unwrap(),
    ]
}

/// Boundary sample that hits polytope vertices with positive probability.
fn pick(s: &ModelSpace, r: &mut ChaCha8Rng) -> BoundaryPoint {
    if let Some(p) = s.polytope_ref() {
        if r.gen_bool(0.3) {
            return s.boundary_from_coords(&p.vertices[r.gen_range(0..p.vertices.len())]).unwrap();
        }
    }
    Chart::new(s).sample_boundary(r).unwrap()
}

/// Pairs closer to the edge of a star than the finite scale ladder resolves:
/// Euclidean directions within 0.05 rad of a right angle, and polytope points
/// within 0.02 of a vertex without being one.
fn below_resolution(s: &ModelSpace, a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
    if let (BoundaryPoint::Direction(u), BoundaryPoint::Direction(v)) = (a, b) {
        return (tits_angle(u, v) - FRAC_PI_2).abs() <= 0.05;
    }
    let Some(p) = s.polytope_ref() else { return false };
    let ch = Chart::new(s);
    let corners: Vec<Vec<f64>> =
        p.vertices.iter().map(|v| ch.boundary_to_chart(&s.boundary_from_coords(v).unwrap()).unwrap()).collect();
    [a, b].into_iter().any(|q| {
        let c = ch.boundary_to_chart(q).unwrap();
        corners.iter().any(|v| {
            let gap = c.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            gap > 1e-12 && gap < 0.02
        })
    })
}

fn flipped(a: Outcome, b: Outcome) -> bool {
    matches!((a, b), (Outcome::Member, Outcome::NonMember) | (Outcome::NonMember, Outcome::Member))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_point_is_in_its_own_star(seed in any::<u64>()) {
        let mut r = rng(seed);
        for s in catalog().into_iter().filter(|s| s.name() != "finite_graph") {
            let xi = Chart::new(&s).sample_boundary(&mut r).unwrap();
            prop_assert_eq!(star_test(&s, &xi, &xi, &StarBudget::default()).unwrap().outcome, Outcome::Member);
        }
    }

    #[test]
    fn verdicts_never_contradict_oracles(seed in any::<u64>()) {
        let mut r = rng(seed);
        for s in oracle_spaces() {
            for _ in 0..4 {
                let (xi, eta) = (pick(&s, &mut r), pick(&s, &mut r));
                if below_resolution(&s, &xi, &eta) {
                    continue;
                }
                let truth = oracle_member(&s, &xi, &eta).unwrap();
                let v = star_test(&s, &xi, &eta, &StarBudget::default()).unwrap().outcome;
                let bad = (truth && v == Outcome::NonMember) || (!truth && v == Outcome::Member);
                prop_assert!(!bad, "{}: {:?} {:?} oracle {} got {:?}", s.name(), xi, eta, truth, v);
            }
        }
    }

    #[test]
    fn larger_budgets_only_resolve(seed in any::<u64>()) {
        let mut r = rng(seed);
        for s in oracle_spaces() {
            let (xi, eta) = (pick(&s, &mut r), pick(&s, &mut r));
            if below_resolution(&s, &xi, &eta) {
                continue;
            }
            let small = star_test(&s, &xi, &eta, &StarBudget::with_evals(1500)).unwrap().outcome;
            let large = star_test(&s, &xi, &eta, &StarBudget::with_evals(20_000)).unwrap().outcome;
            prop_assert!(!flipped(small, large), "{}: {small:?} -> {large:?}", s.name());
        }
    }

    #[test]
    fn rescaling_the_metric_keeps_verdicts(seed in any::<u64>(), lambda in 0.1..10.0f64) {
        let mut r = rng(seed);
        for s in oracle_spaces() {
            let scaled = s.clone().with_scale(lambda).unwrap();
            let (xi, eta) = (pick(&s, &mut r), pick(&s, &mut r));
            let a = star_test(&s, &xi, &eta, &StarBudget::default()).unwrap().outcome;
            let b = star_test(&scaled, &xi, &eta, &StarBudget::default()).unwrap().outcome;
            prop_assert!(!flipped(a, b), "{} at scale {lambda}: {a:?} vs {b:?}", s.name());
        }
    }

    #[test]
    fn visible_pairs_have_disjoint_stars(seed in any::<u64>()) {
        let mut r = rng(seed);
        for s in [ModelSpace::disk(), ModelSpace::ball(2).unwrap()] {
            let ch = Chart::new(&s);
            let (xi, eta) = (ch.sample_boundary(&mut r).unwrap(), ch.sample_boundary(&mut r).unwrap());
            let v = visibility_check(&s, &xi, &eta, 0.0, 32, &[0.2, 0.1, 0.05, 0.025], seed).unwrap();
            if matches!(v, Visibility::Visible { .. }) {
                prop_assert!(!star_test(&s, &xi, &eta, &StarBudget::default()).unwrap().is_member());
            }
        }
    }
}
