//! Executable acceptance criteria with their fixed workloads and tolerances.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::busemann;
use crate::dynamics::mobius::{self, Mat2};
use crate::dynamics::{
    denjoy_wolff, fixed_point_bounded_orbit, geodesic_tracking, horoball_drift, extremal_length_spectrum,
    minimal_displacement, spectral_certificate, translation_number, DenjoyWolff, MapSpec, NonexpansiveMap,
    SpectralOutcome,
};
use crate::random::{classical_expansions, escape_rate, random_denjoy_wolff, CoefficientLaw, MapDistribution};
use crate::spaces::{kerckhoff_distance, BoundaryPoint, Chart, Graph, ModelSpace, Norm, Point, Polytope};
use crate::stars::{
    contraction_check, hyperbolicity_scan, oracle_member, star_test, tits_angle, visibility_check, Neighborhood,
    Outcome, StarBudget, Visibility,
};
use crate::{Result, C64};

/// Deliberate defects used to check that the suite can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    #[default]
    None,
    /// Rescales the metric by 2 on the `d(y, x₀)` side of star inequalities only.
    OneSidedScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str); 14] = [
    (1, "hyperbolic stars"),
    (2, "euclidean half-sphere stars"),
    (3, "hilbert polytope faces"),
    (4, "contraction of isometry powers"),
    (5, "translation numbers"),
    (6, "denjoy-wolff limits"),
    (7, "spectral certificate"),
    (8, "cat(0) tracking"),
    (9, "kerckhoff formula"),
    (10, "extremal length spectrum"),
    (11, "classical expansions"),
    (12, "random denjoy-wolff"),
    (13, "scale invariance of stars"),
    (14, "visibility consistency"),
];

type Check = (bool, String);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn disk_pt(theta: f64) -> BoundaryPoint {
    BoundaryPoint::Disk(C64::from_polar(1.0, theta))
}

fn budget() -> StarBudget {
    StarBudget::with_evals(10_000)
}

fn half_matrix() -> Mat2 {
    [[c(1.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]]
}

fn half_map() -> Result<NonexpansiveMap> {
    NonexpansiveMap::new(&ModelSpace::disk(), MapSpec::MobiusDisk { matrix: half_matrix() })
}

fn parabolic() -> Result<NonexpansiveMap> {
    let m: Mat2 = [[c(-1.0, 1.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(1.0, 1.0)]];
    NonexpansiveMap::new(&ModelSpace::disk(), MapSpec::MobiusDisk { matrix: m })
}

fn positive_matrix() -> Vec<Vec<f64>> {
    vec![vec![2.0, 1.0, 0.5], vec![0.3, 1.0, 0.7], vec![1.0, 0.2, 3.0]]
}

fn square() -> Result<Polytope> {
    Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]])
}

fn hexagon(rng: &mut ChaCha8Rng) -> Result<Polytope> {
    Polytope::from_vertices(
        (0..6)
            .map(|k| {
                let t = k as f64 * PI / 3.0 + rng.gen_range(-0.3..0.3);
                vec![t.cos(), t.sin()]
            })
            .collect(),
    )
}

/// One star verdict together with what the closed-form answer allows.
#[derive(Debug, Clone)]
struct Judged {
    outcome: Outcome,
    /// Outcomes consistent with the oracle at the stated tolerance.
    allowed: Vec<Outcome>,
}

impl Judged {
    fn ok(&self) -> bool {
        self.allowed.contains(&self.outcome)
    }
}

type JudgedRun = fn(f64, &StarBudget) -> Result<Vec<Judged>>;

fn judged_disk(scale: f64, b: &StarBudget) -> Result<Vec<Judged>> {
    let s = ModelSpace::disk().with_scale(scale)?;
    let samples: Vec<_> = (0..20).map(|k| disk_pt(TAU * k as f64 / 20.0)).collect();
    let mesh: Vec<_> = (0..20).map(|k| disk_pt(TAU * (k as f64 + 0.5) / 20.0)).collect();
    let scan = hyperbolicity_scan(&s, &samples, &mesh, b)?;
    let mut out = Vec::new();
    for l in scan.labels {
        let push = |o: Outcome, n: usize, out: &mut Vec<Judged>| {
            out.extend((0..n).map(|_| Judged { outcome: o, allowed: vec![Outcome::NonMember] }))
        };
        push(Outcome::NonMember, l.nonmembers, &mut out);
        push(Outcome::Member, l.members, &mut out);
        push(Outcome::Inconclusive, l.inconclusive, &mut out);
    }
    Ok(out)
}

fn judged_euclidean(scale: f64, b: &StarBudget) -> Result<Vec<Judged>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut out = Vec::new();
    for dim in [2, 3] {
        let s = ModelSpace::normed(dim, Norm::L2)?.with_scale(scale)?;
        let ch = Chart::new(&s);
        for _ in 0..200 {
            let (xi, eta) = (ch.sample_boundary(&mut rng)?, ch.sample_boundary(&mut rng)?);
            let (BoundaryPoint::Direction(u), BoundaryPoint::Direction(v)) = (&xi, &eta) else { unreachable!() };
            let angle = tits_angle(u, v);
            let allowed = if angle <= FRAC_PI_2 - 0.05 {
                vec![Outcome::Member]
            } else if angle <= FRAC_PI_2 {
                vec![Outcome::Member, Outcome::Inconclusive]
            } else if angle <= FRAC_PI_2 + 0.05 {
                vec![Outcome::Member, Outcome::NonMember, Outcome::Inconclusive]
            } else {
                vec![Outcome::NonMember]
            };
            out.push(Judged { outcome: star_test(&s, &xi, &eta, b)?.outcome, allowed });
        }
    }
    Ok(out)
}

fn judged_hilbert(scale: f64, b: &StarBudget) -> Result<Vec<Judged>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let hex = hexagon(&mut rng)?;
    let mut out = Vec::new();
    for p in [square()?, hex] {
        let s = ModelSpace::polytope(p.clone())?.with_scale(scale)?;
        let ch = Chart::new(&s);
        let pick = |rng: &mut ChaCha8Rng| -> Result<BoundaryPoint> {
            if rng.gen_bool(0.3) {
                s.boundary_from_coords(&p.vertices[rng.gen_range(0..p.vertices.len())])
            } else {
                ch.sample_boundary(rng)
            }
        };
        for _ in 0..100 {
            let (xi, eta) = (pick(&mut rng)?, pick(&mut rng)?);
            let member = oracle_member(&s, &xi, &eta).unwrap_or(false);
            let decided = if member { Outcome::Member } else { Outcome::NonMember };
            out.push(Judged { outcome: star_test(&s, &xi, &eta, b)?.outcome, allowed: vec![decided, Outcome::Inconclusive] });
        }
    }
    Ok(out)
}

fn tally(v: &[Judged]) -> String {
    let count = |o| v.iter().filter(|j| j.outcome == o).count();
    format!(
        "{} pairs: {} member, {} nonmember, {} inconclusive, {} contradictions",
        v.len(),
        count(Outcome::Member),
        count(Outcome::NonMember),
        count(Outcome::Inconclusive),
        v.iter().filter(|j| !j.ok()).count()
    )
}

fn c1() -> Result<Check> {
    let v = judged_disk(1.0, &budget())?;
    let all = v.iter().all(|j| j.outcome == Outcome::NonMember);
    Ok((all, tally(&v)))
}

fn c2() -> Result<Check> {
    let v = judged_euclidean(1.0, &budget())?;
    Ok((v.iter().all(Judged::ok), tally(&v)))
}

fn c3() -> Result<Check> {
    let v = judged_hilbert(1.0, &budget())?;
    Ok((v.iter().all(Judged::ok), tally(&v)))
}

fn c4() -> Result<Check> {
    let s = ModelSpace::disk();
    let f = half_map()?;
    let g = f.inverse().expect("automorphism");
    let maps: Vec<_> = (1..=30).map(|n| f.power(n)).collect::<Result<_>>()?;
    let inverses: Vec<_> = (1..=30).map(|n| g.power(n)).collect::<Result<_>>()?;
    let plus = Neighborhood { center: disk_pt(0.0), radius: 0.2 };
    let minus = Neighborhood { center: disk_pt(PI), radius: 0.2 };
    let r = contraction_check(&s, &maps, &inverses, &plus, &minus, 500, 4)?;
    let pass = r.n.is_some_and(|n| n <= 20) && r.violations.is_empty() && r.tested == 500;
    Ok((pass, format!("N = {:?}, {} points, {} violations", r.n, r.tested, r.violations.len())))
}

fn battery() -> Result<Vec<(&'static str, NonexpansiveMap)>> {
    let disk = ModelSpace::disk();
    let l2 = ModelSpace::normed(2, Norm::L2)?;
    let elliptic = mobius::mat_mul(
        &mobius::translation(c(0.2, 0.0)),
        &mobius::mat_mul(&mobius::rotation(2.0), &mobius::translation(c(-0.2, 0.0))),
    );
    let cycle = Graph::new(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0)).collect())?;
    Ok(vec![
        ("mobius a=1/2", half_map()?),
        ("parabolic", parabolic()?),
        ("elliptic", NonexpansiveMap::new(&disk, MapSpec::MobiusDisk { matrix: elliptic })?),
        (
            "diag(2,1) simplex",
            NonexpansiveMap::new(&ModelSpace::simplex(2)?, MapSpec::MatrixOnSimplex { matrix: vec![vec![2.0, 0.0], vec![0.0, 1.0]] })?,
        ),
        ("positive 3x3", NonexpansiveMap::new(&ModelSpace::simplex(3)?, MapSpec::MatrixOnSimplex { matrix: positive_matrix() })?),
        (
            "l2 translation",
            NonexpansiveMap::new(&l2, MapSpec::EuclideanAffine { linear: vec![vec![1.0, 0.0], vec![0.0, 1.0]], translation: vec![3.0, 4.0] })?,
        ),
        (
            "l2 rotation",
            NonexpansiveMap::new(&l2, MapSpec::EuclideanAffine { linear: vec![vec![0.0, -1.0], vec![1.0, 0.0]], translation: vec![3.0, 1.0] })?,
        ),
        ("dilation 2z", NonexpansiveMap::new(&ModelSpace::half_plane(), MapSpec::MobiusHalfPlane { matrix: [[2.0, 0.0], [0.0, 1.0]] })?),
        (
            "polydisc product",
            NonexpansiveMap::new(&ModelSpace::polydisc(2)?, MapSpec::PolydiscProduct { factors: vec![half_matrix(), mobius::rotation(0.4)] })?,
        ),
        ("graph rotation", NonexpansiveMap::new(&ModelSpace::graph(cycle)?, MapSpec::GraphMap { table: vec![1, 2, 3, 4, 0] })?),
    ])
}

fn c5() -> Result<Check> {
    let t1 = translation_number(&half_map()?, &ModelSpace::disk().basepoint, 100)?;
    let e1 = (t1.estimate() - 0.5f64.atanh()).abs();
    let simplex = ModelSpace::simplex(2)?;
    let diag = NonexpansiveMap::new(&simplex, MapSpec::MatrixOnSimplex { matrix: vec![vec![2.0, 0.0], vec![0.0, 1.0]] })?;
    let t2 = translation_number(&diag, &simplex.basepoint, 100)?;
    let e2 = (t2.estimate() - 0.5 * 2f64.ln()).abs();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name = "";
    for (name, f) in battery()? {
        let d = minimal_displacement(&f, 200, 5)?;
        let t = translation_number(&f, &d.argmin, 100)?;
        if t.hi - d.value > worst {
            worst = t.hi - d.value;
            worst_name = name;
        }
    }
    let pass = e1 < 1e-9 && e2 < 1e-9 && worst <= 1e-6;
    Ok((pass, format!("mobius error {e1:.1e}, simplex error {e2:.1e}, max(tau - d(f)) = {worst:.1e} ({worst_name})")))
}

/// Perron vector of a positive matrix by power iteration.
fn perron_power(a: &[Vec<f64>]) -> Vec<f64> {
    let mut v = vec![1.0 / a.len() as f64; a.len()];
    for _ in 0..10_000 {
        let w: Vec<f64> = a.iter().map(|r| r.iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
        let s: f64 = w.iter().sum();
        v = w.iter().map(|x| x / s).collect();
    }
    v
}

fn c6() -> Result<Check> {
    let a = positive_matrix();
    let s = ModelSpace::simplex(3)?;
    let f = NonexpansiveMap::new(&s, MapSpec::MatrixOnSimplex { matrix: a.clone() })?;
    let q = perron_power(&a);
    let fixed_err = match denjoy_wolff(&f, &s.basepoint, 500, 1e-12)? {
        DenjoyWolff::FixedPoint { point: Point::Polytope(p), .. } => {
            p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        }
        _ => f64::INFINITY,
    };
    let p = parabolic()?;
    let xi = disk_pt(0.0);
    let (limit_ok, drift) = match denjoy_wolff(&p, &ModelSpace::disk().basepoint, 10_000, 1e-2)? {
        DenjoyWolff::BoundaryLimit { xi: l, .. } => {
            let h = busemann(p.space(), &xi)?;
            (l == xi, horoball_drift(&p, &h, 1000, 1)?)
        }
        _ => (false, f64::INFINITY),
    };
    let pass = fixed_err < 1e-8 && limit_ok && drift <= 1e-8;
    Ok((pass, format!("perron error {fixed_err:.1e}, parabolic limit at 1: {limit_ok}, drift {drift:.1e}")))
}

fn c7() -> Result<Check> {
    let f = half_map()?;
    let h = busemann(f.space(), &disk_pt(0.0))?;
    match spectral_certificate(&f, &f.space().basepoint, &[h], 1000, 1e-8)? {
        SpectralOutcome::Certified(cert) => {
            let pass = cert.max_violation <= 1e-8 && cert.residual < 1e-6 && cert.checked >= 1000;
            Ok((pass, format!("max violation {:.1e}, residual {:.1e}, n = {}", cert.max_violation, cert.residual, cert.checked)))
        }
        SpectralOutcome::Rejected { best } => Ok((false, format!("rejected, best {:?}", best.map(|b| b.max_violation)))),
    }
}

fn c8() -> Result<Check> {
    let l2 = ModelSpace::normed(2, Norm::L2)?;
    let shift = NonexpansiveMap::new(&l2, MapSpec::EuclideanAffine { linear: vec![vec![1.0, 0.0], vec![0.0, 1.0]], translation: vec![3.0, 4.0] })?;
    let last = |t: &crate::dynamics::Tracking| t.residuals.last().map_or(f64::INFINITY, |r| r.1);
    let r1 = last(&geodesic_tracking(&shift, &Point::Normed(vec![1.0, 1.0]), 1000, 1e-6)?);
    let r2 = last(&geodesic_tracking(&half_map()?, &ModelSpace::disk().basepoint, 1000, 1e-6)?);
    let rot = NonexpansiveMap::new(&l2, MapSpec::EuclideanAffine { linear: vec![vec![0.0, -1.0], vec![1.0, 0.0]], translation: vec![3.0, 1.0] })?;
    let fp = fixed_point_bounded_orbit(&rot, &Point::Normed(vec![4.0, -1.0]), 100, 1e-9)?;
    let Point::Normed(p) = fp.point else { unreachable!() };
    let err = ((p[0] - 1.0).powi(2) + (p[1] - 2.0).powi(2)).sqrt();
    let pass = r1 < 1e-6 && r2 < 1e-6 && err < 1e-6;
    Ok((pass, format!("translation r = {r1:.1e}, hyperbolic r = {r2:.1e}, rotation centre error {err:.1e}")))
}

fn c9() -> Result<Check> {
    let hp = |re: f64, im: f64| Point::HalfPlane(c(re, im));
    let k = kerckhoff_distance(&hp(0.0, 1.0), &hp(0.0, 2.0), 50)?;
    let e0 = (k - 0.5 * 2f64.ln()).abs();
    let s = ModelSpace::half_plane();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = hp(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        let y = hp(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        worst = worst.max((kerckhoff_distance(&x, &y, 50)? - s.distance(&x, &y)?).abs());
    }
    Ok((e0 < 1e-9 && worst < 1e-3, format!("d(i, 2i) error {e0:.1e}, max random-pair error {worst:.1e}")))
}

fn c10() -> Result<Check> {
    let s = ModelSpace::half_plane();
    let f = NonexpansiveMap::new(&s, MapSpec::MobiusHalfPlane { matrix: [[2.0, 0.0], [0.0, 1.0]] })?;
    let e = extremal_length_spectrum(&f, &s.basepoint, 40, 5)?;
    let pass = e.beta == (0, 1) && (e.lhs - 2.0).abs() < 1e-3 && (e.rhs - 2.0).abs() < 1e-3;
    Ok((pass, format!("beta = {:?}, lhs = {:.6}, rhs = {:.6}", e.beta, e.lhs, e.rhs)))
}

fn c11() -> Result<Check> {
    let k = |v| CoefficientLaw::Constant { value: v };
    let cf = classical_expansions(&MapDistribution::ContinuedFraction { a: k(1.0), b: k(1.0) }, 0, 50)?;
    let e1 = (cf.last() - (5f64.sqrt() - 1.0) / 2.0).abs();
    let rad = classical_expansions(&MapDistribution::Radical { a: k(0.0), b: k(4.0) }, 0, 50)?;
    let exact = rad.values.iter().all(|v| *v == 2.0);
    let tower = classical_expansions(&MapDistribution::IteratedExponential { a: k(2f64.sqrt()) }, 0, 100)?;
    let e3 = (tower.last() - 2.0).abs();
    let pass = e1 < 1e-10 && exact && e3 < 1e-8;
    Ok((pass, format!("golden error {e1:.1e}, radical exactly 2: {exact}, tower error {e3:.1e}")))
}

fn two_map_battery() -> MapDistribution {
    let s = 0.75f64.sqrt();
    let f1: Mat2 = [[c(1.0 / s, 0.0), c(0.5 / s, 0.0)], [c(0.5 / s, 0.0), c(1.0 / s, 0.0)]];
    let f2: Mat2 = [[c(1.0 / s, 0.0), c(0.0, 0.5 / s)], [c(0.0, -0.5 / s), c(1.0 / s, 0.0)]];
    MapDistribution::FiniteSupport {
        space: ModelSpace::disk(),
        maps: vec![MapSpec::MobiusDisk { matrix: f1 }, MapSpec::MobiusDisk { matrix: f2 }],
        weights: vec![0.5, 0.5],
    }
}

fn c12() -> Result<Check> {
    let d = two_map_battery();
    let o = ModelSpace::disk().basepoint;
    let e = escape_rate(&d, &o, 500, 200, 7)?;
    let r = random_denjoy_wolff(&d, &o, &Point::Disk(c(0.0, 0.5)), 500, 200, 1e-6, 7)?;
    let pass = e.excludes_zero() && r.decided_fraction >= 0.95 && r.max_gap < 1e-6 && r.limits_match;
    Ok((
        pass,
        format!(
            "tau = {:.5} CI [{:.5}, {:.5}], decided {:.3}, max gap {:.1e}, limits match: {}",
            e.tau_hat, e.ci[0], e.ci[1], r.decided_fraction, r.max_gap, r.limits_match
        ),
    ))
}

fn c13(fault: Fault) -> Result<Check> {
    let base = budget();
    let scaled_budget = match fault {
        Fault::None => base.clone(),
        Fault::OneSidedScale => StarBudget { basepoint_weight: 2.0, ..base.clone() },
    };
    let runs: [JudgedRun; 3] = [judged_disk, judged_euclidean, judged_hilbert];
    let mut flips = 0;
    let mut total = 0;
    for run in runs {
        let a = run(1.0, &base)?;
        let b = run(2.0, &scaled_budget)?;
        total += a.len();
        flips += a
            .iter()
            .zip(&b)
            .filter(|(x, y)| matches!((x.outcome, y.outcome), (Outcome::Member, Outcome::NonMember) | (Outcome::NonMember, Outcome::Member)))
            .count();
    }
    Ok((flips == 0, format!("{flips} flipped verdicts among {total} pairs at scale 2")))
}

fn c14() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let radii = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let mut visible = 0;
    let mut bad = 0;
    let mut pairs = 0;
    for s in [ModelSpace::disk(), ModelSpace::ball(2)?] {
        let ch = Chart::new(&s);
        for _ in 0..10 {
            let (xi, eta) = (ch.sample_boundary(&mut rng)?, ch.sample_boundary(&mut rng)?);
            pairs += 1;
            if let Visibility::Visible { .. } = visibility_check(&s, &xi, &eta, 0.0, 32, &radii, rng.gen())? {
                visible += 1;
                if star_test(&s, &xi, &eta, &budget())?.is_member() {
                    bad += 1;
                }
            }
        }
    }
    let l2 = ModelSpace::normed(2, Norm::L2)?;
    let e = |i: usize| BoundaryPoint::Direction((0..2).map(|j| if i == j { 1.0 } else { 0.0 }).collect());
    let witness = matches!(visibility_check(&l2, &e(0), &e(1), 0.0, 32, &radii, 14)?, Visibility::Violated { .. });
    let pass = bad == 0 && visible > 0 && witness;
    Ok((pass, format!("{visible}/{pairs} pairs visible, {bad} with member stars, l2 witness for e1,e2: {witness}")))
}

/// Runs one criterion; errors are reported as failures.
pub fn run_criterion(id: u8, fault: Fault) -> CriterionReport {
    let title = CRITERIA.iter().find(|(i, _)| *i == id).map_or("unknown", |(_, t)| t).to_string();
    let start = Instant::now();
    let out = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        13 => c13(fault),
        14 => c14(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport { id, title, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_all(fault: Fault) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(id, _)| run_criterion(*id, fault)).collect()
}

pub fn failing_ids(reports: &[CriterionReport]) -> Vec<u8> {
    reports.iter().filter(|r| !r.passed).map(|r| r.id).collect()
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<32} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}
