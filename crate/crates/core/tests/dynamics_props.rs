mod common;

use common::*;
use proptest::prelude::*;
use starbound::boundary::busemann;
use starbound::dynamics::mobius::{self, Mat2};
use starbound::dynamics::{
    denjoy_wolff, geodesic_tracking, horoball_drift, iterate, minimal_displacement, spectral_certificate,
    translation_number, DenjoyWolff, MapSpec, NonexpansiveMap, SpectralOutcome,
};
use starbound::spaces::{Chart, ModelSpace, Norm, Point};
use starbound::C64;

fn disk_map(m: Mat2) -> NonexpansiveMap {
    NonexpansiveMap::new(&ModelSpace::disk(), MapSpec::MobiusDisk { matrix: m }).unwrap()
}

fn automorphism(re: f64, im: f64, theta: f64) -> Mat2 {
    mobius::mat_mul(&mobius::translation(C64::new(re, im)), &mobius::rotation(theta))
}

/// Hyperbolic map conjugate to `z ↦ (z + s)/(1 + s z)`.
fn hyperbolic(s: f64, g: &Mat2) -> Mat2 {
    let h = [[C64::new(1.0, 0.0), C64::new(s, 0.0)], [C64::new(s, 0.0), C64::new(1.0, 0.0)]];
    mobius::mat_mul(g, &mobius::mat_mul(&h, &mobius::adj(g)))
}

fn small_point() -> impl Strategy<Value = (f64, f64)> {
    (-0.6..0.6f64, -0.6..0.6f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn translation_number_is_below_minimal_displacement((re, im) in small_point(), theta in -3.0..3.0f64, seed in any::<u64>()) {
        let f = disk_map(automorphism(re, im, theta));
        let d = minimal_displacement(&f, 100, seed).unwrap();
        let t = translation_number(&f, &d.argmin, 100).unwrap();
        prop_assert!(t.hi <= d.value + 1e-6, "{t:?} {d:?}");
    }

    #[test]
    fn positive_matrices_respect_the_displacement_bound(a in proptest::collection::vec(0.05..3.0f64, 9), seed in any::<u64>()) {
        let m: Vec<Vec<f64>> = a.chunks(3).map(|r| r.to_vec()).collect();
        let f = NonexpansiveMap::new(&ModelSpace::simplex(3).unwrap(), MapSpec::MatrixOnSimplex { matrix: m }).unwrap();
        let d = minimal_displacement(&f, 100, seed).unwrap();
        let t = translation_number(&f, &d.argmin, 100).unwrap();
        prop_assert!(t.hi <= d.value + 1e-6, "{t:?} {d:?}");
    }

    #[test]
    fn conjugation_preserves_translation_number((re, im) in small_point(), theta in -3.0..3.0f64, (gr, gi) in small_point(), phi in -3.0..3.0f64) {
        let m = automorphism(re, im, theta);
        let g = automorphism(gr, gi, phi);
        let conj = mobius::mat_mul(&g, &mobius::mat_mul(&m, &mobius::adj(&g)));
        let x = ModelSpace::disk().basepoint;
        let a = translation_number(&disk_map(m), &x, 200).unwrap();
        let b = translation_number(&disk_map(conj), &x, 200).unwrap();
        let slack = a.width() + b.width() + 1e-9;
        prop_assert!((a.estimate() - b.estimate()).abs() <= slack, "{a:?} {b:?}");
    }

    #[test]
    fn orbits_contract(a in proptest::collection::vec(0.05..3.0f64, 9), seed in any::<u64>()) {
        let s = ModelSpace::simplex(3).unwrap();
        let m: Vec<Vec<f64>> = a.chunks(3).map(|r| r.to_vec()).collect();
        let f = NonexpansiveMap::new(&s, MapSpec::MatrixOnSimplex { matrix: m }).unwrap();
        let mut r = rng(seed);
        let (mut x, mut y) = (sample(&s, &mut r, 0.9), sample(&s, &mut r, 0.9));
        let mut last = dist(&s, &x, &y);
        for _ in 0..30 {
            x = f.apply(&x).unwrap();
            y = f.apply(&y).unwrap();
            let d = dist(&s, &x, &y);
            prop_assert!(d <= last + 1e-9);
            last = d;
        }
    }

    #[test]
    fn wolff_limits_are_invariant_horoball_centres(s in 0.1..0.9f64, (gr, gi) in small_point(), phi in -3.0..3.0f64, seed in any::<u64>()) {
        let f = disk_map(hyperbolic(s, &automorphism(gr, gi, phi)));
        let dw = denjoy_wolff(&f, &ModelSpace::disk().basepoint, 300, 1e-6).unwrap();
        let DenjoyWolff::BoundaryLimit { xi, .. } = dw else { return Err(TestCaseError::fail(format!("{dw:?}"))) };
        let h = busemann(f.space(), &xi).unwrap();
        prop_assert!(horoball_drift(&f, &h, 1000, seed).unwrap() <= 1e-8);
    }

    #[test]
    fn certified_residuals_are_small(s in 0.1..0.9f64, (gr, gi) in small_point(), phi in -3.0..3.0f64) {
        let f = disk_map(hyperbolic(s, &automorphism(gr, gi, phi)));
        let x0 = ModelSpace::disk().basepoint;
        let DenjoyWolff::BoundaryLimit { xi, .. } = denjoy_wolff(&f, &x0, 300, 1e-6).unwrap() else { unreachable!() };
        let h = busemann(f.space(), &xi).unwrap();
        if let SpectralOutcome::Certified(c) = spectral_certificate(&f, &x0, &[h], 1000, 1e-8).unwrap() {
            prop_assert!(c.residual < 1e-3, "{c:?}");
        }
    }

    #[test]
    fn tracked_orbits_converge_to_the_ray_endpoint(t in proptest::collection::vec(-3.0..3.0f64, 3), angle in -3.0..3.0f64) {
        let s = ModelSpace::normed(3, Norm::L2).unwrap();
        let (c, sn) = (angle.cos(), angle.sin());
        let spec = MapSpec::EuclideanAffine {
            linear: vec![vec![c, -sn, 0.0], vec![sn, c, 0.0], vec![0.0, 0.0, 1.0]],
            translation: t,
        };
        let f = NonexpansiveMap::new(&s, spec).unwrap();
        let x = Point::Normed(vec![0.5, -0.5, 0.0]);
        let tr = geodesic_tracking(&f, &x, 1000, 1e-2).unwrap();
        if tr.tracked {
            let end = Chart::new(&s).boundary_to_chart(tr.endpoint.as_ref().unwrap()).unwrap();
            let rec = iterate(&f, &x, 1000).unwrap();
            let gap = |c: &Vec<f64>| c.iter().zip(&end).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let (mid, last) = (gap(&rec.extrinsic[100]), gap(rec.extrinsic.last().unwrap()));
            // f^N x lies within r_N N of x + τ N u
            let (n, r) = (1000.0, tr.residuals.last().unwrap().1);
            let x_norm = 0.5f64.sqrt();
            let bound = 2.0 * (x_norm + r * n) / (tr.tau * n) + 1.0 / (1.0 + tr.tau * n - x_norm - r * n);
            prop_assert!(last <= mid && last <= bound, "{mid} {last} {bound}");
        }
    }
}
