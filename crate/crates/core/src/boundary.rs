//! Metric functionals `h_x = d(·, x) − d(x₀, x)`, closed-form Busemann
//! functions, sampled horofunction limits and horoballs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spaces::{hermitian, norm_sqr, BoundaryPoint, Chart, ModelSpace, Norm, Point, SpaceKind};
use crate::stars::{star_test, Outcome, StarBudget, StarVerdict};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params")]
pub enum FunctionalKind {
    InnerPoint { x: Point },
    BusemannForm { xi: BoundaryPoint },
    /// Values of the limit at a fixed probe set.
    SampledLimit { probes: Vec<Point>, values: Vec<f64> },
}

/// Basepointed metric functional on a model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFunctional {
    pub space: ModelSpace,
    pub functional: FunctionalKind,
    offset: f64,
}

fn one_minus(z: &[C64]) -> f64 {
    let n = norm_sqr(z).sqrt();
    (1.0 - n) * (1.0 + n)
}

/// Unnormalised raw Busemann value `½ log(|1 − ⟨z, ξ⟩|² / (1 − |z|²))`.
fn ball_busemann(z: &[C64], xi: &[C64]) -> f64 {
    let num = (C64::new(1.0, 0.0) - hermitian(z, xi)).norm_sqr();
    0.5 * (num / one_minus(z)).ln()
}

fn cayley(z: C64) -> C64 {
    (z - C64::i()) / (z + C64::i())
}

fn busemann_raw(space: &ModelSpace, xi: &BoundaryPoint, z: &Point) -> Result<f64> {
    Ok(match (&space.kind, xi, z) {
        (SpaceKind::PoincareDisk, BoundaryPoint::Disk(x), Point::Disk(w)) => ball_busemann(&[*w], &[*x]),
        (SpaceKind::KobayashiBall { .. }, BoundaryPoint::Ball(x), Point::Ball(w)) => ball_busemann(w, x),
        (SpaceKind::NormedSpace { norm: Norm::L2, .. }, BoundaryPoint::Direction(u), Point::Normed(w)) => {
            -w.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
        }
        (SpaceKind::TorusTeichmueller, BoundaryPoint::HalfPlane(None), Point::HalfPlane(w)) => -0.5 * w.im.ln(),
        (SpaceKind::TorusTeichmueller, BoundaryPoint::HalfPlane(Some(t)), Point::HalfPlane(w)) => {
            // |w − t|² / Im w, the half-plane image of the disk form
            0.5 * ((w - t).norm_sqr() / w.im).ln() - 0.5 * (1.0 + t * t).ln()
        }
        _ => return Err(Error::unsupported("busemann", space.name())),
    })
}

impl MetricFunctional {
    pub fn basepoint(&self) -> &Point {
        &self.space.basepoint
    }

    pub fn evaluate(&self, y: &Point) -> Result<f64> {
        self.space.check(y)?;
        match &self.functional {
            FunctionalKind::InnerPoint { x } => Ok(self.space.d(y, x) - self.offset),
            FunctionalKind::BusemannForm { xi } => {
                Ok(self.space.scale * busemann_raw(&self.space, xi, y)? - self.offset)
            }
            FunctionalKind::SampledLimit { probes, values } => probes
                .iter()
                .position(|p| p == y)
                .map(|i| values[i])
                .ok_or_else(|| Error::Invalid("sampled functional is only known on its probes".into())),
        }
    }
}

/// `h_x(y) = d(y, x) − d(x₀, x)`.
pub fn metric_functional_of_point(space: &ModelSpace, x: &Point) -> Result<MetricFunctional> {
    let offset = space.distance(&space.basepoint, x)?;
    Ok(MetricFunctional {
        space: space.clone(),
        functional: FunctionalKind::InnerPoint { x: x.clone() },
        offset,
    })
}

/// Closed-form Busemann function at `ξ`, normalised to vanish at the basepoint.
pub fn busemann(space: &ModelSpace, xi: &BoundaryPoint) -> Result<MetricFunctional> {
    space.check_boundary(xi)?;
    let offset = space.scale * busemann_raw(space, xi, &space.basepoint)?;
    Ok(MetricFunctional {
        space: space.clone(),
        functional: FunctionalKind::BusemannForm { xi: xi.clone() },
        offset,
    })
}

pub(crate) fn cayley_boundary(xi: &BoundaryPoint) -> Option<C64> {
    match xi {
        BoundaryPoint::HalfPlane(None) => Some(C64::new(1.0, 0.0)),
        BoundaryPoint::HalfPlane(Some(t)) => Some(cayley(C64::new(*t, 0.0))),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoroDiagnostic {
    /// True when `d(x₀, x_n)` stops growing; the functional is then an inner one.
    pub bounded: bool,
    /// Largest max−min spread of `h_{x_n}(probe)` over the tail window.
    pub oscillation: f64,
    pub converged: bool,
    pub tail_start: usize,
}

/// Basepoint plus 32 seeded interior probes.
pub fn default_probes(space: &ModelSpace, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = Chart::new(space);
    let mut out = vec![space.basepoint.clone()];
    out.extend((0..32).map(|_| ch.sample_interior(&mut rng, 0.8)));
    out
}

/// Horofunction limit of `h_{x_n}` sampled on `probes`. Probe values are taken
/// from the last element of the sequence; the tail window is its last half.
pub fn approx_horofunction(
    space: &ModelSpace,
    sequence: &[Point],
    probes: &[Point],
    tol: f64,
) -> Result<(MetricFunctional, HoroDiagnostic)> {
    let last = sequence.last().ok_or_else(|| Error::Invalid("empty sequence".into()))?;
    for p in sequence.iter().chain(probes) {
        space.check(p)?;
    }
    let tail_start = sequence.len() / 2;
    let depth: Vec<f64> = sequence.iter().map(|x| space.d(&space.basepoint, x)).collect();
    let growth = depth[depth.len() - 1] - depth[tail_start.min(depth.len() - 1)];
    if sequence.len() < 2 || growth <= tol.max(1e-12) {
        let diag = HoroDiagnostic { bounded: true, oscillation: 0.0, converged: true, tail_start };
        return Ok((metric_functional_of_point(space, last)?, diag));
    }
    let mut oscillation = 0.0f64;
    let mut values = Vec::with_capacity(probes.len());
    for p in probes {
        let tail: Vec<f64> = sequence[tail_start..]
            .iter()
            .zip(&depth[tail_start..])
            .map(|(x, dx)| space.d(p, x) - dx)
            .collect();
        let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        oscillation = oscillation.max(hi - lo);
        values.push(*tail.last().unwrap());
    }
    let diag = HoroDiagnostic { bounded: false, oscillation, converged: oscillation <= tol, tail_start };
    let f = MetricFunctional {
        space: space.clone(),
        functional: FunctionalKind::SampledLimit { probes: probes.to_vec(), values },
        offset: 0.0,
    };
    Ok((f, diag))
}

/// Sublevel set `{y : h(y) ≤ C}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horoball {
    pub functional: MetricFunctional,
    pub level: f64,
}

impl Horoball {
    pub fn contains(&self, y: &Point) -> Result<bool> {
        Ok(self.functional.evaluate(y)? <= self.level)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualStarReport {
    pub sampled: usize,
    /// Boundary samples reached by sequences inside the horoball.
    pub accumulating: usize,
    pub certified: usize,
    pub inconclusive: usize,
    /// Samples for which `ξ ∈ S(η)` was refuted.
    pub violations: Vec<(BoundaryPoint, StarVerdict)>,
    pub fraction: f64,
}

/// True when every chart ball of radius `0.25·2^{-k}` around `η` (k < 8)
/// contains a horoball point.
fn horoball_accumulates(hb: &Horoball, eta: &BoundaryPoint, seed: u64) -> Result<bool> {
    let space = &hb.functional.space;
    let ch = Chart::new(space);
    let ce = ch.boundary_to_chart(eta)?;
    let c0 = ch.to_chart(&space.basepoint)?;
    let basis = ch.tangent_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..8 {
        let r = 0.25 * 0.5f64.powi(k);
        let mut found = false;
        for trial in 0..64 {
            let mut c: Vec<f64> = ce.iter().zip(&c0).map(|(e, o)| e + 0.5 * r * (o - e)).collect();
            if trial > 0 {
                for b in &basis {
                    let w = r * (2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0) / (basis.len() as f64).sqrt();
                    c.iter_mut().zip(b).for_each(|(ci, bi)| *ci += w * bi);
                }
            }
            let dist: f64 = c.iter().zip(&ce).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist >= r {
                continue;
            }
            if let Some(p) = ch.from_chart(&c) {
                if hb.contains(&p)? {
                    found = true;
                    break;
                }
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that boundary points reached from inside a horoball at `ξ` lie in the dual star of `ξ`.
pub fn horoball_dualstar_check(
    space: &ModelSpace,
    xi: &BoundaryPoint,
    level: f64,
    boundary_samples: &[BoundaryPoint],
    budget: &StarBudget,
) -> Result<DualStarReport> {
    let hb = Horoball { functional: busemann(space, xi)?, level };
    let mut report = DualStarReport {
        sampled: boundary_samples.len(),
        accumulating: 0,
        certified: 0,
        inconclusive: 0,
        violations: Vec::new(),
        fraction: 0.0,
    };
    for (i, eta) in boundary_samples.iter().enumerate() {
        if !horoball_accumulates(&hb, eta, i as u64)? {
            continue;
        }
        report.accumulating += 1;
        let v = star_test(space, eta, xi, budget)?;
        match v.outcome {
            Outcome::Member => report.certified += 1,
            Outcome::NonMember => report.violations.push((eta.clone(), v)),
            Outcome::Inconclusive => report.inconclusive += 1,
        }
    }
    report.fraction = if report.accumulating == 0 {
        1.0
    } else {
        report.certified as f64 / report.accumulating as f64
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::geodesic_ray;
    use rand::Rng;

    fn disk(x: f64, y: f64) -> Point {
        Point::Disk(C64::new(x, y))
    }

    fn atanh_series(x: f64) -> f64 {
        (0..4000).map(|k| x.powi(2 * k + 1) / (2 * k + 1) as f64).sum()
    }

    #[test]
    fn inner_functional_examples() {
        let s = ModelSpace::disk();
        let h = metric_functional_of_point(&s, &disk(0.5, 0.0)).unwrap();
        assert_eq!(h.evaluate(&s.basepoint).unwrap(), 0.0);
        let v = h.evaluate(&disk(-0.5, 0.0)).unwrap();
        assert!((v - (atanh_series(0.8) - atanh_series(0.5))).abs() < 1e-12);
        assert!((h.evaluate(&disk(0.5, 0.0)).unwrap() + atanh_series(0.5)).abs() < 1e-12);
    }

    #[test]
    fn disk_busemann_examples() {
        let s = ModelSpace::disk();
        let b = busemann(&s, &BoundaryPoint::Disk(C64::new(1.0, 0.0))).unwrap();
        assert_eq!(b.evaluate(&s.basepoint).unwrap(), 0.0);
        let v = b.evaluate(&disk(0.5, 0.0)).unwrap();
        assert!((v - 0.5 * (0.25f64 / 0.75).ln()).abs() < 1e-14);
        // limit of inner functionals along r → 1
        let h = metric_functional_of_point(&s, &disk(1.0 - 1e-9, 0.0)).unwrap();
        assert!((h.evaluate(&disk(0.5, 0.0)).unwrap() - v).abs() < 1e-6);
    }

    #[test]
    fn l2_busemann_is_linear() {
        let s = ModelSpace::normed(2, Norm::L2).unwrap();
        let b = busemann(&s, &BoundaryPoint::Direction(vec![1.0, 0.0])).unwrap();
        assert!((b.evaluate(&Point::Normed(vec![3.0, 0.0])).unwrap() + 3.0).abs() < 1e-15);
        let l1 = ModelSpace::normed(2, Norm::L1).unwrap();
        assert!(busemann(&l1, &BoundaryPoint::Direction(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn sampled_limits_match_closed_forms() {
        let s = ModelSpace::disk();
        let seq: Vec<Point> = (1..=20).map(|n| disk(1.0 - 0.5f64.powi(n), 0.0)).collect();
        let probes = vec![disk(0.0, 0.0), disk(0.0, 0.5), disk(0.0, -0.5)];
        let (f, diag) = approx_horofunction(&s, &seq, &probes, 1e-4).unwrap();
        assert!(!diag.bounded);
        let b = busemann(&s, &BoundaryPoint::Disk(C64::new(1.0, 0.0))).unwrap();
        for p in &probes {
            assert!((f.evaluate(p).unwrap() - b.evaluate(p).unwrap()).abs() < 1e-4);
        }
        let (g, diag) = approx_horofunction(&s, &vec![disk(0.2, 0.1); 5], &probes, 1e-4).unwrap();
        assert!(diag.bounded);
        assert!(matches!(g.functional, FunctionalKind::InnerPoint { .. }));

        let e = ModelSpace::normed(2, Norm::L2).unwrap();
        let seq: Vec<Point> = (1..=2000).map(|n| Point::Normed(vec![n as f64 * 50.0, 0.0])).collect();
        let probes = vec![Point::Normed(vec![0.3, -0.7]), Point::Normed(vec![-1.0, 2.0])];
        let (f, _) = approx_horofunction(&e, &seq, &probes, 1e-4).unwrap();
        for p in &probes {
            let Point::Normed(z) = p else { unreachable!() };
            assert!((f.evaluate(p).unwrap() + z[0]).abs() < 1e-4);
        }
    }

    #[test]
    fn busemann_agrees_with_ray_limits() {
        let spaces = [
            ModelSpace::disk(),
            ModelSpace::ball(2).unwrap(),
            ModelSpace::normed(3, Norm::L2).unwrap(),
            ModelSpace::half_plane(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for s in &spaces {
            let ch = Chart::new(s);
            let probes = default_probes(s, 2);
            for _ in 0..10 {
                let xi = ch.sample_boundary(&mut rng).unwrap();
                let ray = geodesic_ray(s, &s.basepoint, &xi).unwrap();
                let is_l2 = matches!(s.kind, SpaceKind::NormedSpace { .. });
                // the Euclidean ray needs far larger parameters for the same accuracy
                let seq: Vec<Point> = (0..=30)
                    .map(|k| ray.at(if is_l2 { 1e3 * 2f64.powi(k / 2) } else { 0.5 * k as f64 }))
                    .collect();
                let (f, _) = approx_horofunction(s, &seq, &probes, 1e-4).unwrap();
                let b = busemann(s, &xi).unwrap();
                for p in &probes {
                    let gap = (f.evaluate(p).unwrap() - b.evaluate(p).unwrap()).abs();
                    assert!(gap < 1e-4, "{} gap {gap}", s.name());
                }
            }
        }
    }

    #[test]
    fn functionals_are_one_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = ModelSpace::ball(2).unwrap();
        let ch = Chart::new(&s);
        let xi = ch.sample_boundary(&mut rng).unwrap();
        let fs = [
            busemann(&s, &xi).unwrap(),
            metric_functional_of_point(&s, &ch.sample_interior(&mut rng, 0.9)).unwrap(),
        ];
        for f in &fs {
            for _ in 0..1000 {
                let (y, z) = (ch.sample_interior(&mut rng, 0.99), ch.sample_interior(&mut rng, 0.99));
                let gap = (f.evaluate(&y).unwrap() - f.evaluate(&z).unwrap()).abs();
                assert!(gap <= s.d(&y, &z) + 1e-8);
            }
        }
    }

    #[test]
    fn horoball_examples_and_monotonicity() {
        let s = ModelSpace::disk();
        let b = busemann(&s, &BoundaryPoint::Disk(C64::new(1.0, 0.0))).unwrap();
        let hb = Horoball { functional: b.clone(), level: 0.0 };
        assert!(hb.contains(&s.basepoint).unwrap());
        assert!(hb.contains(&disk(0.5, 0.0)).unwrap());
        assert!(!hb.contains(&disk(-0.5, 0.0)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = Chart::new(&s);
        for _ in 0..500 {
            let y = ch.sample_interior(&mut rng, 0.99);
            let (c, c2) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0));
            let small = Horoball { functional: b.clone(), level: c };
            let big = Horoball { functional: b.clone(), level: c + c2 };
            assert!(!small.contains(&y).unwrap() || big.contains(&y).unwrap());
        }
    }

    #[test]
    fn half_plane_busemann_matches_disk_conjugate() {
        let h = ModelSpace::half_plane();
        let d = ModelSpace::disk();
        let xi = BoundaryPoint::HalfPlane(Some(0.7));
        let bh = busemann(&h, &xi).unwrap();
        let bd = busemann(&d, &BoundaryPoint::Disk(cayley_boundary(&xi).unwrap())).unwrap();
        for z in [C64::new(0.3, 0.2), C64::new(-2.0, 5.0), C64::new(0.7, 0.01)] {
            let a = bh.evaluate(&Point::HalfPlane(z)).unwrap();
            let b = bd.evaluate(&Point::Disk(cayley(z))).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
        let inf = busemann(&h, &BoundaryPoint::HalfPlane(None)).unwrap();
        assert!((inf.evaluate(&Point::HalfPlane(C64::new(5.0, 4.0))).unwrap() + 0.5 * 4f64.ln()).abs() < 1e-14);
    }
}
