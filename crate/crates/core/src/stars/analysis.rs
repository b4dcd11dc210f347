use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dist, star_test, star_test_based, Budgeted, Neighborhood, Outcome, StarBudget, StarVerdict};
use crate::dynamics::NonexpansiveMap;
use crate::spaces::{almost_geodesic, geodesic, AlmostGeodesic, BoundaryPoint, Chart, ModelSpace, Point, SpaceKind};
use crate::{Error, Result};

/// Star distances on a finite boundary sample; `None` is infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarMatrix {
    pub dist: Vec<Vec<Option<u32>>>,
    /// Set when some test was inconclusive, so entries only bound the true distance from above.
    pub upper_bound: bool,
}

pub fn star_distance_matrix(space: &ModelSpace, samples: &[BoundaryPoint], budget: &StarBudget) -> Result<StarMatrix> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let mut adj = vec![vec![false; n]; n];
    let mut upper_bound = false;
    for i in 0..n {
        for j in i + 1..n {
            let a = star_test(space, &samples[i], &samples[j], budget)?;
            let edge = a.is_member() || {
                let b = star_test(space, &samples[j], &samples[i], budget)?;
                upper_bound |= a.outcome == Outcome::Inconclusive || b.outcome == Outcome::Inconclusive;
                b.is_member()
            };
            adj[i][j] = edge;
            adj[j][i] = edge;
        }
    }
    let mut dist = vec![vec![None; n]; n];
    for (s, row) in dist.iter_mut().enumerate() {
        row[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = row[u].unwrap();
            for v in 0..n {
                if adj[u][v] && row[v].is_none() {
                    row[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(StarMatrix { dist, upper_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceReport {
    /// Candidates certified to lie in every star.
    pub certified: Vec<BoundaryPoint>,
    pub inconclusive: usize,
    pub possibly_empty: bool,
}

/// Sampled intersection of the stars of `xis` over the candidate set.
pub fn face(space: &ModelSpace, xis: &[BoundaryPoint], candidates: &[BoundaryPoint], budget: &StarBudget) -> Result<FaceReport> {
    if xis.is_empty() {
        return Err(Error::Invalid("face needs at least one boundary point".into()));
    }
    let mut certified = Vec::new();
    let mut inconclusive = 0;
    'cand: for eta in candidates {
        let mut all = true;
        for xi in xis {
            match star_test(space, xi, eta, budget)?.outcome {
                Outcome::Member => {}
                Outcome::NonMember => continue 'cand,
                Outcome::Inconclusive => all = false,
            }
        }
        if all {
            certified.push(eta.clone());
        } else {
            inconclusive += 1;
        }
    }
    let possibly_empty = certified.is_empty();
    Ok(FaceReport { certified, inconclusive, possibly_empty })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum Visibility {
    /// Paths between the shrinking neighbourhoods stay within `bound` of the basepoint.
    Visible { bound: f64, per_radius: Vec<f64> },
    /// Minimal basepoint distances grow with the endpoints; the recorded pair is the farthest path.
    Violated { per_radius: Vec<f64>, x: Point, y: Point, min_distance: f64 },
    Inconclusive { per_radius: Vec<f64> },
}

fn sample_near(ch: &Chart, center: &[f64], c0: &[f64], r: f64, rng: &mut impl Rng) -> Option<Point> {
    let basis = ch.tangent_basis();
    for _ in 0..32 {
        let depth = r * (0.3 + 0.4 * rng.gen::<f64>());
        let mut c: Vec<f64> = center.iter().zip(c0).map(|(e, o)| e + depth * (o - e) / dist(center, c0)).collect();
        for b in &basis {
            let w = 0.5 * r * (2.0 * rng.gen::<f64>() - 1.0) / (basis.len() as f64).sqrt();
            c.iter_mut().zip(b).for_each(|(ci, bi)| *ci += w * bi);
        }
        if dist(&c, center) < r && ch.depth(&c) > 0.1 * r {
            if let Some(p) = ch.from_chart(&c) {
                return Some(p);
            }
        }
    }
    None
}

fn connect(space: &ModelSpace, x: &Point, y: &Point, kappa: f64) -> Result<AlmostGeodesic> {
    if kappa > 0.0 {
        almost_geodesic(space, x, y, kappa)
    } else {
        geodesic(space, x, y)
    }
}

/// Visibility test between neighbourhoods of `ξ` and `η` with chart radii `radii` (decreasing).
pub fn visibility_check(
    space: &ModelSpace,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
    kappa: f64,
    samples: usize,
    radii: &[f64],
    seed: u64,
) -> Result<Visibility> {
    let ch = Chart::new(space);
    let (cxi, ceta) = (ch.boundary_to_chart(xi)?, ch.boundary_to_chart(eta)?);
    if dist(&cxi, &ceta) < 1e-12 {
        return Err(Error::Invalid("visibility needs distinct boundary points".into()));
    }
    let c0 = ch.to_chart(&space.basepoint)?;
    let x0 = &space.basepoint;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_radius = Vec::new();
    let mut reach = Vec::new();
    let mut worst: Option<(Point, Point, f64)> = None;
    for &r in radii {
        let mut big_r = 0.0f64;
        let mut near = f64::INFINITY;
        for _ in 0..samples {
            let (Some(x), Some(y)) = (sample_near(&ch, &cxi, &c0, r, &mut rng), sample_near(&ch, &ceta, &c0, r, &mut rng))
            else {
                continue;
            };
            let path = connect(space, &x, &y, kappa)?;
            let m = path.min_distance_to(space, x0, f64::INFINITY);
            near = near.min(space.d(x0, &x).min(space.d(x0, &y)));
            if m > big_r {
                big_r = m;
                worst = Some((x, y, m));
            }
        }
        per_radius.push(big_r);
        reach.push(near);
    }
    let n = per_radius.len();
    if n < 3 {
        return Ok(Visibility::Inconclusive { per_radius });
    }
    let growth: Vec<f64> = (1..n)
        .map(|i| (per_radius[i] - per_radius[i - 1]) / (reach[i] - reach[i - 1]).max(1e-12))
        .collect();
    let tail = &growth[growth.len().saturating_sub(2)..];
    if tail.iter().all(|g| *g <= 0.1) {
        let bound = per_radius.iter().cloned().fold(0.0, f64::max);
        return Ok(Visibility::Visible { bound, per_radius });
    }
    if tail.iter().all(|g| *g >= 0.5) {
        let (x, y, min_distance) = worst.expect("violations carry a path");
        return Ok(Visibility::Violated { per_radius, x, y, min_distance });
    }
    Ok(Visibility::Inconclusive { per_radius })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceCheck {
    /// Distinct boundary projections of the sampled ray points.
    pub limits: Vec<BoundaryPoint>,
    pub certified_pairs: usize,
    pub inconclusive_pairs: Vec<(usize, usize)>,
    pub refuted_pairs: Vec<(usize, usize)>,
}

/// Confirms that the limit points of a ray are pairwise in each other's stars.
pub fn geodesic_face_check(space: &ModelSpace, ray: &AlmostGeodesic, times: &[f64], budget: &StarBudget) -> Result<FaceCheck> {
    let ch = Chart::new(space);
    let depth: Vec<f64> = times.iter().map(|&t| space.d(&space.basepoint, &ray.at(t))).collect();
    if depth.len() < 2 || depth.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("ray is not unbounded on the sampled times".into()));
    }
    let mut limits: Vec<(Vec<f64>, BoundaryPoint)> = Vec::new();
    for &t in &times[times.len() / 2..] {
        let c = ch.to_chart(&ray.at(t))?;
        let b = ch.project_to_boundary(&c)?;
        let cb = ch.boundary_to_chart(&b)?;
        if limits.iter().all(|(c, _)| dist(c, &cb) > 1e-6) {
            limits.push((cb, b));
        }
    }
    let mut report = FaceCheck {
        limits: limits.iter().map(|(_, b)| b.clone()).collect(),
        certified_pairs: 0,
        inconclusive_pairs: Vec::new(),
        refuted_pairs: Vec::new(),
    };
    for i in 0..limits.len() {
        for j in 0..limits.len() {
            if i == j {
                continue;
            }
            match star_test(space, &limits[i].1, &limits[j].1, budget)?.outcome {
                Outcome::Member => report.certified_pairs += 1,
                Outcome::NonMember => report.refuted_pairs.push((i, j)),
                Outcome::Inconclusive => report.inconclusive_pairs.push((i, j)),
            }
        }
    }
    Ok(report)
}

/// Upper bound for `d(z, V ∩ X)` by minimisation over the chart ball.
pub fn distance_to_neighborhood(space: &ModelSpace, z: &Point, nb: &Neighborhood) -> Result<f64> {
    let ch = Chart::new(space);
    let cz = ch.to_chart(z)?;
    let ce = ch.boundary_to_chart(&nb.center)?;
    if dist(&cz, &ce) < nb.radius {
        return Ok(0.0);
    }
    let c0 = ch.to_chart(&space.basepoint)?;
    let mut ev = Budgeted { space, chart: ch, weight: 1.0, evals: 0, cap: usize::MAX };
    match ev.closest_in_ball(z, &cz, &ce, &c0, nb.radius) {
        Ok((v, _)) => Ok(v),
        Err(_) => unreachable!("uncapped evaluator"),
    }
}

fn in_halfspace(space: &ModelSpace, z: &Point, nb: &Neighborhood) -> Result<bool> {
    Ok(distance_to_neighborhood(space, z, nb)? <= space.d(z, &space.basepoint))
}

/// `g z ∈ H(V)`; images rounded onto the ideal boundary count only when they lie in `V` itself.
fn lands_in(space: &ModelSpace, g: &NonexpansiveMap, z: &Point, nb: &Neighborhood) -> Result<bool> {
    match g.apply(z) {
        Ok(w) => in_halfspace(space, &w, nb),
        Err(Error::Domain(e)) => {
            let c = match (&space.kind, g.image(z)) {
                (SpaceKind::PoincareDisk, Point::Disk(w)) => vec![w.re, w.im],
                (SpaceKind::KobayashiBall { .. }, Point::Ball(w)) | (SpaceKind::Polydisc { .. }, Point::Polydisc(w)) => {
                    w.iter().flat_map(|v| [v.re, v.im]).collect()
                }
                (SpaceKind::HilbertPolytope(_), Point::Polytope(x)) => x,
                _ => return Err(Error::Domain(e)),
            };
            Ok(dist(&c, &Chart::new(space).boundary_to_chart(&nb.center)?) < nb.radius)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// First index from which every tested point lands in `H(V⁺)`; 1-based.
    pub n: Option<usize>,
    /// Sampled points outside `H(V⁻)`.
    pub tested: usize,
    /// Violations at the last recorded index.
    pub violations: Vec<Point>,
}

/// Checks `g_n(X ∖ H(V⁻)) ⊂ H(V⁺)` for large `n` on sampled points.
pub fn contraction_check(
    space: &ModelSpace,
    maps: &[NonexpansiveMap],
    inverses: &[NonexpansiveMap],
    v_plus: &Neighborhood,
    v_minus: &Neighborhood,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if maps.is_empty() || maps.len() != inverses.len() {
        return Err(Error::Invalid("need matching nonempty lists of maps and inverses".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ch = Chart::new(space);
    for g in maps {
        if !g.is_isometry_sampled(64, &mut rng)? {
            return Err(Error::Validation("contraction check needs isometries".into()));
        }
    }
    let x0 = &space.basepoint;
    let (g_last, h_last) = (maps.last().unwrap(), inverses.last().unwrap());
    if !v_plus.contains(space, &g_last.apply(x0)?)? || !v_minus.contains(space, &h_last.apply(x0)?)? {
        return Err(Error::Invalid("g_n x₀ and g_n⁻¹ x₀ must reach V⁺ and V⁻".into()));
    }
    let mut pts = Vec::new();
    for _ in 0..samples * 100 {
        if pts.len() == samples {
            break;
        }
        let z = ch.sample_interior(&mut rng, 0.999);
        if !in_halfspace(space, &z, v_minus)? {
            pts.push(z);
        }
    }
    let mut first_good = None;
    let mut violations = Vec::new();
    for (k, g) in maps.iter().enumerate() {
        violations.clear();
        for z in &pts {
            if !lands_in(space, g, z, v_plus)? {
                violations.push(z.clone());
            }
        }
        if violations.is_empty() {
            first_good.get_or_insert(k + 1);
        } else {
            first_good = None;
        }
    }
    Ok(ContractionReport { n: first_good, tested: pts.len(), violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLabel {
    pub xi: BoundaryPoint,
    pub hyperbolic: bool,
    pub members: usize,
    pub nonmembers: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityScan {
    pub fraction: f64,
    pub labels: Vec<PointLabel>,
}

/// Labels each sample hyperbolic when every distinct mesh point tests NonMember.
pub fn hyperbolicity_scan(space: &ModelSpace, samples: &[BoundaryPoint], mesh: &[BoundaryPoint], budget: &StarBudget) -> Result<HyperbolicityScan> {
    if samples.is_empty() {
        return Err(Error::Invalid("need at least one sample".into()));
    }
    let ch = Chart::new(space);
    let mut labels = Vec::new();
    for xi in samples {
        let cxi = ch.boundary_to_chart(xi)?;
        let mut label = PointLabel { xi: xi.clone(), hyperbolic: false, members: 0, nonmembers: 0, inconclusive: 0 };
        for eta in mesh {
            if dist(&cxi, &ch.boundary_to_chart(eta)?) < 1e-12 {
                continue;
            }
            match star_test(space, xi, eta, budget)?.outcome {
                Outcome::Member => label.members += 1,
                Outcome::NonMember => label.nonmembers += 1,
                Outcome::Inconclusive => label.inconclusive += 1,
            }
        }
        label.hyperbolic = label.members == 0 && label.inconclusive == 0;
        labels.push(label);
    }
    let fraction = labels.iter().filter(|l| l.hyperbolic).count() as f64 / labels.len() as f64;
    Ok(HyperbolicityScan { fraction, labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasepointRow {
    pub eta: BoundaryPoint,
    pub based: Vec<Outcome>,
    pub unbased: Vec<Outcome>,
    /// Decided verdicts that disagree across basepoints.
    pub differs: bool,
}

fn disagree(v: &[Outcome]) -> bool {
    v.contains(&Outcome::Member) && v.contains(&Outcome::NonMember)
}

/// Compares based and unbased star verdicts across several basepoints.
pub fn basepoint_dependence_probe(
    space: &ModelSpace,
    xi: &BoundaryPoint,
    basepoints: &[Point],
    mesh: &[BoundaryPoint],
    budget: &StarBudget,
) -> Result<Vec<BasepointRow>> {
    if basepoints.len() < 2 {
        return Err(Error::Invalid("need at least two basepoints".into()));
    }
    let spaces: Vec<ModelSpace> = basepoints
        .iter()
        .map(|p| space.clone().with_basepoint(p.clone()))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for eta in mesh {
        let based: Vec<Outcome> = spaces
            .iter()
            .map(|s| star_test_based(s, xi, eta, budget).map(|v| v.outcome))
            .collect::<Result<_>>()?;
        let unbased: Vec<Outcome> = spaces
            .iter()
            .map(|s| star_test(s, xi, eta, budget).map(|v| v.outcome))
            .collect::<Result<_>>()?;
        let differs = disagree(&based) || disagree(&unbased);
        rows.push(BasepointRow { eta: eta.clone(), based, unbased, differs });
    }
    Ok(rows)
}

/// Verdicts for every ordered pair of samples; used by reports and the atlas.
pub fn verdict_table(space: &ModelSpace, samples: &[BoundaryPoint], budget: &StarBudget) -> Result<Vec<Vec<StarVerdict>>> {
    samples
        .iter()
        .map(|xi| samples.iter().map(|eta| star_test(space, xi, eta, budget)).collect())
        .collect()
}

/// True when no sampled boundary point exists in the space (finite graphs).
pub fn has_empty_boundary(space: &ModelSpace) -> bool {
    matches!(space.kind, SpaceKind::FiniteGraph(_))
}
