//! Escape rates, random Denjoy–Wolff limits and ergodic certificates.

use serde::{Deserialize, Serialize};

use super::{evaluate_backward, sample_trial, CocycleTrajectory, MapDistribution, ScaledMat, Value};
use crate::boundary::{busemann, metric_functional_of_point};
use crate::dynamics::mobius;
use crate::dynamics::NonexpansiveMap;
use crate::spaces::{BoundaryPoint, Chart, ModelSpace, Point, SpaceKind};
use crate::stars::{dual_star_test, Outcome, StarBudget};
use crate::{Error, Result, BOUNDARY_GUARD, C64};

/// Extra draws used to locate the limit of the tail product.
const TAIL: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeRateEstimate {
    pub tau_hat: f64,
    /// Normal interval `τ̂ ± 1.96·stderr`, widened to contain the median. Statistical, not rigorous.
    pub ci: [f64; 2],
    pub median: f64,
    /// `d(x, R_N x)/N` per trial.
    pub per_trial: Vec<f64>,
    /// `min_{k ≤ n} ā_k / k` for the trial-mean displacement `ā`.
    pub fekete: Vec<f64>,
    /// Trials stopped early by the boundary guard.
    pub truncated: Vec<bool>,
}

impl EscapeRateEstimate {
    pub fn excludes_zero(&self) -> bool {
        self.ci[0] > 0.0
    }
}

/// `d(x, P x)` for a product of disk automorphisms, without forming `P x`.
fn mobius_displacement(p: &ScaledMat, x: C64) -> f64 {
    let t = mobius::translation(x);
    let m = mobius::mat_mul(&mobius::adj(&t), &mobius::mat_mul(&p.m, &t));
    let log_det = p.log_det + 2.0 * (1.0 - x.norm_sqr()).ln();
    ((m[1][1].norm() + m[0][1].norm()).ln() + p.log_scale - 0.5 * log_det).max(0.0)
}

/// Displacements `d(x, R_n x)` for `n = 0..` until `N` or the boundary guard.
fn displacements(traj: &CocycleTrajectory, space: &ModelSpace, x: &Point) -> Result<(Vec<f64>, bool)> {
    let n = traj.len();
    if let (Some(z), Some((_, true))) = (NonexpansiveMap::disk_coord(x), traj.mobius_prefix(0)) {
        let a = (0..=n).map(|k| mobius_displacement(&traj.mobius_prefix(k).expect("prefix").0, z)).collect();
        return Ok((a, false));
    }
    let chart = Chart::new(space);
    let mut a = vec![0.0];
    for k in 1..=n {
        let y = match evaluate_backward(traj, &Value::Point(x.clone()), k) {
            Ok(Value::Point(y)) => y,
            _ => return Ok((a, true)),
        };
        if chart.supported() && chart.depth(&chart.to_chart(&y)?) < BOUNDARY_GUARD {
            return Ok((a, true));
        }
        a.push(space.d(x, &y));
    }
    Ok((a, false))
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 { s[k / 2] } else { 0.5 * (s[k / 2 - 1] + s[k / 2]) }
}

/// Kingman escape rate `τ = lim d(x, R_n x)/n` over independent trials.
pub fn escape_rate(dist: &MapDistribution, x: &Point, n: usize, trials: usize, seed: u64) -> Result<EscapeRateEstimate> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let space = dist.space()?;
    space.check(x)?;
    let mut per_trial = Vec::with_capacity(trials);
    let mut truncated = Vec::with_capacity(trials);
    let mut rows = Vec::with_capacity(trials);
    for t in 0..trials {
        let traj = sample_trial(dist, seed, t as u64, n)?;
        let (a, cut) = displacements(&traj, &space, x)?;
        let m = a.len() - 1;
        per_trial.push(if m == 0 { 0.0 } else { a[m] / m as f64 });
        truncated.push(cut);
        rows.push(a);
    }
    let common = rows.iter().map(|a| a.len() - 1).min().unwrap_or(0);
    let mut fekete = Vec::with_capacity(common);
    let mut best = f64::INFINITY;
    for k in 1..=common {
        let mean = rows.iter().map(|a| a[k]).sum::<f64>() / trials as f64;
        best = best.min(mean / k as f64);
        fekete.push(best);
    }
    let (tau_hat, sd) = mean_sd(&per_trial);
    let med = median(&per_trial);
    let half = 1.96 * sd / (trials as f64).sqrt();
    let ci = [(tau_hat - half).min(med), (tau_hat + half).max(med)];
    Ok(EscapeRateEstimate { tau_hat, ci, median: med, per_trial, fekete, truncated })
}

/// Extrinsic chart coordinates of `R_n x`; may sit on the chart boundary after rounding.
fn extrinsic(traj: &CocycleTrajectory, space: &ModelSpace, x: &Point, n: usize) -> Result<Vec<f64>> {
    if let (Some(z), Some((p, _))) = (NonexpansiveMap::disk_coord(x), traj.mobius_prefix(n)) {
        let w = mobius::act(&p.m, z);
        return Ok(vec![w.re, w.im]);
    }
    match evaluate_backward(traj, &Value::Point(x.clone()), n)? {
        Value::Point(y) => Chart::new(space).to_chart(&y),
        Value::Scalar(_) => Err(Error::Mismatch),
    }
}

fn chart_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLimit {
    pub trial: usize,
    pub decided: bool,
    pub xi: Option<BoundaryPoint>,
    /// Extrinsic distance between the limits from `x` and from `y`.
    pub gap: f64,
    /// `|c_N − c_{N/2}|` for the orbit of `x`.
    pub cauchy: f64,
    /// The orbit of `x` stays away from the boundary (bounded orbit).
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomDwReport {
    pub trials: Vec<TrialLimit>,
    pub decided_fraction: f64,
    pub max_gap: f64,
    /// Every decided trial reached the same limit from `x` and `y` within `tol`.
    pub limits_match: bool,
    /// `ξ_y ∈ S^∨(ξ_x)` checks, reported on spaces without a visibility certificate.
    pub dual_star: Option<Vec<Outcome>>,
}

fn has_visibility(space: &ModelSpace) -> bool {
    matches!(space.kind, SpaceKind::PoincareDisk | SpaceKind::KobayashiBall { .. } | SpaceKind::TorusTeichmueller)
}

/// Per-trial extrinsic limits of `R_n x` and `R_n y`.
pub fn random_denjoy_wolff(
    dist: &MapDistribution,
    x: &Point,
    y: &Point,
    n: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<RandomDwReport> {
    let space = dist.space()?;
    let chart = Chart::new(&space);
    if !chart.supported() || matches!(space.kind, SpaceKind::NormedSpace { .. }) {
        return Err(Error::unsupported("random_denjoy_wolff", space.name()));
    }
    space.check(x)?;
    space.check(y)?;
    let mut out = Vec::with_capacity(trials);
    let mut pairs = Vec::new();
    for t in 0..trials {
        let traj = sample_trial(dist, seed, t as u64, n)?;
        let cx = extrinsic(&traj, &space, x, n)?;
        let ch = extrinsic(&traj, &space, x, n / 2)?;
        let cy = extrinsic(&traj, &space, y, n)?;
        let cauchy = chart_gap(&cx, &ch);
        let depth = chart.depth(&cx).max(0.0);
        let decided = cauchy < tol && depth < tol;
        let mut xi = None;
        if decided {
            let bx = chart.project_to_boundary(&cx)?;
            if pairs.len() < 5 {
                pairs.push((bx.clone(), chart.project_to_boundary(&cy)?));
            }
            xi = Some(bx);
        }
        out.push(TrialLimit { trial: t, decided, xi, gap: chart_gap(&cx, &cy), cauchy, interior: depth > 1e-2 });
    }
    let decided: Vec<&TrialLimit> = out.iter().filter(|t| t.decided).collect();
    let max_gap = decided.iter().map(|t| t.gap).fold(0.0, f64::max);
    let dual_star = if has_visibility(&space) {
        None
    } else {
        let budget = StarBudget::default();
        Some(pairs.iter().map(|(a, b)| dual_star_test(&space, a, b, &budget).map(|v| v.outcome)).collect::<Result<_>>()?)
    };
    Ok(RandomDwReport {
        decided_fraction: decided.len() as f64 / trials.max(1) as f64,
        max_gap,
        limits_match: decided.iter().all(|t| t.gap < tol),
        dual_star,
        trials: out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub tau_hat: f64,
    /// `|−h_ω(R_N x₀)/N − τ̂|` per trial; `None` when skipped.
    pub residuals: Vec<Option<f64>>,
    pub skipped: usize,
    pub max_residual: f64,
}

/// `h(R_N x₀)` for the Busemann function at the limit, from the prefix and tail products.
fn mobius_busemann(traj: &CocycleTrajectory, n: usize, x: C64, scale: f64) -> Option<f64> {
    let (p, auto) = traj.mobius_prefix(n)?;
    if !auto {
        return None;
    }
    let mut tail = ScaledMat::identity();
    for k in n + 1..=traj.len() {
        tail = tail.times(&traj.map(k).ok()?.disk_matrix()?);
    }
    let w = mobius::act(&tail.m, C64::new(0.0, 0.0));
    if 1.0 - w.norm() > 1e-6 {
        return None;
    }
    let w = w / w.norm();
    // conjugate so that x₀ sits at the origin
    let t = mobius::translation(x);
    let ti = mobius::adj(&t);
    let m = mobius::mat_mul(&ti, &mobius::mat_mul(&p.m, &t));
    let log_det = p.log_det + 2.0 * (1.0 - x.norm_sqr()).ln();
    let w2 = mobius::act(&ti, w);
    let xi = mobius::act(&p.m, w);
    let xi = xi / xi.norm();
    let offset = 0.5 * ((xi - x).norm_sqr() / (1.0 - x.norm_sqr())).ln();
    let h = offset - (m[1][0] * w2 + m[1][1]).norm().ln() - p.log_scale + 0.5 * log_det;
    Some(scale * h)
}

/// Per-trial residuals of `−h(R_N x₀)/N ≈ τ` with `h` the Busemann function at the trial's limit.
pub fn ergodic_certificate(dist: &MapDistribution, x0: &Point, n: usize, trials: usize, seed: u64) -> Result<ErgodicReport> {
    let tau = escape_rate(dist, x0, n, trials, seed)?.tau_hat;
    let space = dist.space()?;
    let chart = Chart::new(&space);
    let mut residuals = Vec::with_capacity(trials);
    for t in 0..trials {
        let traj = sample_trial(dist, seed, t as u64, n + TAIL)?;
        let h = if let Some(z) = NonexpansiveMap::disk_coord(x0) {
            mobius_busemann(&traj, n, z, space.scale)
        } else {
            None
        };
        let h = match h {
            Some(h) => Some(h),
            None => trial_functional(&traj, &space, &chart, x0, n)?,
        };
        residuals.push(h.map(|h| (-h / n as f64 - tau).abs()));
    }
    let skipped = residuals.iter().filter(|r| r.is_none()).count();
    let max_residual = residuals.iter().flatten().cloned().fold(0.0, f64::max);
    Ok(ErgodicReport { tau_hat: tau, residuals, skipped, max_residual })
}

fn trial_functional(traj: &CocycleTrajectory, space: &ModelSpace, chart: &Chart, x0: &Point, n: usize) -> Result<Option<f64>> {
    let Ok(Value::Point(y)) = evaluate_backward(traj, &Value::Point(x0.clone()), n) else { return Ok(None) };
    let c = chart.to_chart(&y)?;
    if chart.depth(&c) > 1e-2 {
        return Ok(Some(metric_functional_of_point(space, x0)?.evaluate(&y)?));
    }
    let Ok(xi) = chart.project_to_boundary(&c) else { return Ok(None) };
    match busemann(space, &xi) {
        Ok(h) => Ok(Some(h.evaluate(&y)?)),
        Err(Error::Unsupported { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
