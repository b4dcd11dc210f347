//! Spectral certificates `h(f^n x₀) ≤ −τ n` and dual-star checks on limit sets.

use serde::{Deserialize, Serialize};

use super::maps::NonexpansiveMap;
use super::mobius::Frame;
use super::orbit::{framed_orbit, iterate, translation_number, denjoy_wolff, DenjoyWolff};
use crate::boundary::{busemann, cayley_boundary, FunctionalKind, MetricFunctional};
use crate::spaces::{BoundaryPoint, Chart, Point};
use crate::stars::{dual_star_test, star_test, Outcome, StarBudget};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    /// Index of the certifying candidate.
    pub index: usize,
    pub tau_hi: f64,
    /// `max_n h(f^n x₀) + τ_hi n`.
    pub max_violation: f64,
    /// `|−h(f^M x₀)/M − τ_hi|` at the last checked `M`.
    pub residual: f64,
    /// Number of iterates checked.
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum SpectralOutcome {
    Certified(SpectralCertificate),
    Rejected { best: Option<SpectralCertificate> },
}

fn is_attracting(xi: &BoundaryPoint, frame: &Frame) -> bool {
    let z = match xi {
        BoundaryPoint::Disk(z) => Some(*z),
        other => cayley_boundary(other),
    };
    z.is_some_and(|z| (z - frame.attracting).norm() < 1e-12)
}

/// Values `h(f^n x₀)` for every computable `n ≤ N`.
fn orbit_values(map: &NonexpansiveMap, h: &MetricFunctional, x0: &Point, n: usize) -> Result<Vec<f64>> {
    if let (Some((frame, fps)), FunctionalKind::BusemannForm { xi }) = (framed_orbit(map, x0, n), &h.functional) {
        if is_attracting(xi, &frame) {
            // cocycle: h(f^n x₀) = h(x₀) + b(f^n x₀) − b(x₀) in the normal form
            let h0 = h.evaluate(x0)?;
            let b0 = Frame::busemann_attracting(fps[0]);
            return Ok(fps.iter().map(|p| h0 + h.space.scale * (Frame::busemann_attracting(*p) - b0)).collect());
        }
    }
    let rec = iterate(map, x0, n)?;
    rec.points.iter().map(|p| h.evaluate(p)).collect()
}

/// Busemann function at the Denjoy–Wolff point, when it has a closed form.
pub fn default_candidates(map: &NonexpansiveMap, x0: &Point, n: usize) -> Result<Vec<MetricFunctional>> {
    match denjoy_wolff(map, x0, n, 1e-2)? {
        DenjoyWolff::BoundaryLimit { xi, .. } => Ok(busemann(map.space(), &xi).into_iter().collect()),
        _ => Ok(Vec::new()),
    }
}

/// Searches `candidates` for `h` with `h(f^n x₀) ≤ −τ n` for all `n ≤ N`, up to `tol`.
pub fn spectral_certificate(
    map: &NonexpansiveMap,
    x0: &Point,
    candidates: &[MetricFunctional],
    n: usize,
    tol: f64,
) -> Result<SpectralOutcome> {
    let tau = translation_number(map, x0, n)?.hi;
    let mut best: Option<SpectralCertificate> = None;
    for (index, h) in candidates.iter().enumerate() {
        if h.space != *map.space() {
            return Err(Error::Mismatch);
        }
        let values = orbit_values(map, h, x0, n)?;
        let m = values.len() - 1;
        let max_violation = values
            .iter()
            .enumerate()
            .map(|(k, v)| v + tau * k as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let residual = if m == 0 { 0.0 } else { (-values[m] / m as f64 - tau).abs() };
        let cert = SpectralCertificate { index, tau_hi: tau, max_violation, residual, checked: m };
        if best.as_ref().is_none_or(|b| cert.max_violation < b.max_violation) {
            best = Some(cert);
        }
    }
    Ok(match best {
        Some(c) if c.max_violation <= tol => SpectralOutcome::Certified(c),
        best => SpectralOutcome::Rejected { best },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetReport {
    /// Accumulation point along record displacement times.
    pub xi: BoundaryPoint,
    pub accumulation: Vec<BoundaryPoint>,
    /// `η ∈ S^∨(ξ)` outcome per accumulation point.
    pub dual_star: Vec<Outcome>,
    /// Displacements are nondecreasing along the orbit.
    pub monotone: bool,
    /// Mutual star memberships `(i, j, η_j ∈ S(η_i))`, checked when monotone.
    pub pairwise: Vec<(usize, usize, Outcome)>,
    pub certified: bool,
}

/// Checks that the orbit's accumulation points lie in the dual star of a limit point.
pub fn limit_set_dualstar_check(map: &NonexpansiveMap, x: &Point, n: usize, budget: &StarBudget) -> Result<LimitSetReport> {
    let space = map.space();
    let rec = iterate(map, x, n)?;
    if rec.bounded {
        return Err(Error::Validation("orbit is bounded; its limit set is empty".into()));
    }
    let chart = Chart::new(space);
    if !chart.supported() {
        return Err(Error::unsupported("limit_set_dualstar_check", space.name()));
    }
    let a = &rec.displacements;
    let mut record = 0;
    for k in 1..rec.extrinsic.len().min(a.len()) {
        if a[k] > a[record] {
            record = k;
        }
    }
    let xi = chart.project_to_boundary(&rec.extrinsic[record])?;
    let cxi = chart.boundary_to_chart(&xi)?;
    let mut accumulation: Vec<(Vec<f64>, BoundaryPoint)> = vec![(cxi, xi.clone())];
    let len = rec.extrinsic.len();
    for c in &rec.extrinsic[len - len / 4 - 1..] {
        let b = chart.project_to_boundary(c)?;
        let cb = chart.boundary_to_chart(&b)?;
        let fresh = accumulation
            .iter()
            .all(|(d, _)| d.iter().zip(&cb).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt() > 1e-6);
        if fresh && accumulation.len() < 8 {
            accumulation.push((cb, b));
        }
    }
    let accumulation: Vec<BoundaryPoint> = accumulation.into_iter().map(|(_, b)| b).collect();
    let dual_star = accumulation
        .iter()
        .map(|eta| dual_star_test(space, &xi, eta, budget).map(|v| v.outcome))
        .collect::<Result<Vec<_>>>()?;
    let monotone = a.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let mut pairwise = Vec::new();
    if monotone {
        for i in 0..accumulation.len() {
            for j in 0..accumulation.len() {
                if i != j {
                    pairwise.push((i, j, star_test(space, &accumulation[i], &accumulation[j], budget)?.outcome));
                }
            }
        }
    }
    let certified = dual_star.iter().chain(pairwise.iter().map(|p| &p.2)).all(|o| *o == Outcome::Member);
    Ok(LimitSetReport { xi, accumulation, dual_star, monotone, pairwise, certified })
}
