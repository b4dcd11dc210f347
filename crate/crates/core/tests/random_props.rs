mod common;

use common::*;
use proptest::prelude::*;
use starbound::dynamics::mobius::{self, Mat2};
use starbound::dynamics::MapSpec;
use starbound::random::{escape_rate, evaluate_backward, random_denjoy_wolff, sample_trial, MapDistribution, Value};
use starbound::spaces::{ModelSpace, Point};
use starbound::C64;

fn battery(s1: f64, s2: f64, phi: f64, w: f64) -> MapDistribution {
    let h = |s: f64| -> Mat2 { [[C64::new(1.0, 0.0), C64::new(s, 0.0)], [C64::new(s, 0.0), C64::new(1.0, 0.0)]] };
    let g = mobius::rotation(phi);
    let turned = mobius::mat_mul(&g, &mobius::mat_mul(&h(s2), &mobius::adj(&g)));
    MapDistribution::FiniteSupport {
        space: ModelSpace::disk(),
        maps: vec![MapSpec::MobiusDisk { matrix: h(s1) }, MapSpec::MobiusDisk { matrix: turned }],
        weights: vec![w, 1.0 - w],
    }
}

fn dist_strategy() -> impl Strategy<Value = MapDistribution> {
    (0.1..0.8f64, 0.1..0.8f64, 0.3..2.8f64, 0.2..0.8f64).prop_map(|(a, b, p, w)| battery(a, b, p, w))
}

/// Distance error from rounding disk coordinates near the circle.
fn resolution(p: &Point) -> f64 {
    let Point::Disk(z) = p else { unreachable!() };
    1e-9 + 1e-15 / (1.0 - z.norm())
}

fn point(v: Value) -> Point {
    match v {
        Value::Point(p) => p,
        Value::Scalar(_) => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_are_deterministic(d in dist_strategy(), seed in any::<u64>(), trial in 0u64..50) {
        let a = sample_trial(&d, seed, trial, 100).unwrap();
        let b = sample_trial(&d, seed, trial, 100).unwrap();
        prop_assert_eq!(&a.steps, &b.steps);
        let x = Value::Point(Point::Disk(C64::new(0.1, 0.2)));
        prop_assert_eq!(evaluate_backward(&a, &x, 10).unwrap(), evaluate_backward(&b, &x, 10).unwrap());
    }

    #[test]
    fn backward_products_peel_off_the_first_map(d in dist_strategy(), seed in any::<u64>(), (re, im) in (-0.5..0.5f64, -0.5..0.5f64)) {
        let t = sample_trial(&d, seed, 0, 12).unwrap();
        let s = ModelSpace::disk();
        let x = Point::Disk(C64::new(re, im));
        for n in 0..11 {
            let fx = t.map(n + 1).unwrap().apply(&x).unwrap();
            let a = point(evaluate_backward(&t, &x.clone().into(), n + 1).unwrap());
            let b = point(evaluate_backward(&t, &fx.into(), n).unwrap());
            prop_assert!(dist(&s, &a, &b) < resolution(&a), "{n}: {a:?} {b:?} {}", dist(&s, &a, &b));
        }
    }

    #[test]
    fn backward_products_are_nonexpansive(d in dist_strategy(), seed in any::<u64>()) {
        let t = sample_trial(&d, seed, 1, 15).unwrap();
        let s = ModelSpace::disk();
        let mut r = rng(seed);
        let (x, y) = (sample(&s, &mut r, 0.8), sample(&s, &mut r, 0.8));
        for n in 0..15 {
            let rx = point(evaluate_backward(&t, &x.clone().into(), n).unwrap());
            let ry = point(evaluate_backward(&t, &y.clone().into(), n).unwrap());
            prop_assert!(dist(&s, &rx, &ry) <= dist(&s, &x, &y) + resolution(&rx).max(resolution(&ry)));
        }
    }

    #[test]
    fn fekete_sequence_is_monotone(d in dist_strategy(), seed in any::<u64>()) {
        let e = escape_rate(&d, &ModelSpace::disk().basepoint, 200, 8, seed).unwrap();
        prop_assert!(e.fekete.windows(2).all(|w| w[1] <= w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn independence_gap_shrinks(d in dist_strategy(), seed in any::<u64>()) {
        let o = ModelSpace::disk().basepoint;
        let y = Point::Disk(C64::new(0.0, 0.5));
        let e = escape_rate(&d, &o, 300, 20, seed).unwrap();
        prop_assume!(e.excludes_zero());
        let short = random_denjoy_wolff(&d, &o, &y, 50, 20, 1e-6, seed).unwrap();
        let long = random_denjoy_wolff(&d, &o, &y, 300, 20, 1e-6, seed).unwrap();
        for (a, b) in short.trials.iter().zip(&long.trials) {
            if b.decided {
                prop_assert!(b.gap <= a.gap.max(1e-12), "{a:?} {b:?}");
            }
        }
        prop_assert!(long.max_gap < 1e-6);
    }
}
