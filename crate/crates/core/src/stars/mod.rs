//! Halfspaces, stars, dual stars and the sampling tests built on the
//! sequence criterion: `η ∈ S(ξ)` iff some `x_n → ξ`, `y_n → η` and `C ≥ 0`
//! satisfy `d(y_n, x_n) ≤ d(y_n, x₀) + C`.
//!
//! The test measures, for nested chart neighbourhoods `V_r ∋ ξ`, `W_r ∋ η`, the
//! margin `m(r) = min_{y ∈ W_r, x ∈ V_r} d(y, x) − d(y, x₀)` over a fixed
//! family of approach points `y`, and classifies the trend of `m(r_k)` along
//! `r_k = r₀ 2^{-k}`. A bounded, settling profile yields a member witness; a
//! profile whose increments stay positive without decaying is a separation
//! record (the margin exceeds every constant of the grid eventually).

mod analysis;
mod exact;

pub use analysis::*;
pub use exact::{oracle_member, star_exact, tits_angle, StarDescription};

use serde::{Deserialize, Serialize};

use crate::spaces::{BoundaryPoint, Chart, ModelSpace, Point, SpaceKind};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarBudget {
    /// Cap on distance evaluations per test.
    pub max_evals: usize,
    /// Constants `C` tried for member witnesses.
    pub c_grid: Vec<f64>,
    /// Number of doubling scales of the base level.
    pub scales: usize,
    /// Weight of the basepoint term `d(y, x₀)`; 1 except for fault injection.
    pub basepoint_weight: f64,
}

impl Default for StarBudget {
    fn default() -> Self {
        StarBudget {
            max_evals: 10_000,
            c_grid: std::iter::once(0.0).chain((0..=6).map(|k| 2f64.powi(k))).collect(),
            scales: 7,
            basepoint_weight: 1.0,
        }
    }
}

impl StarBudget {
    pub fn with_evals(max_evals: usize) -> Self {
        StarBudget { max_evals, ..Self::default() }
    }

    pub fn c_max(&self) -> f64 {
        self.c_grid.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Witness {
    /// `ξ = η`.
    Trivial,
    /// `d(y_k, x_k) ≤ d(y_k, x₀) + c` for every recorded pair.
    Member { c: f64, xs: Vec<Point>, ys: Vec<Point> },
    /// Margins grow without settling; `compact_radius` bounds the Gromov products seen.
    NonMember { radii: Vec<f64>, margins: Vec<f64>, compact_radius: f64, c_max: f64 },
    Undecided { radii: Vec<f64>, margins: Vec<f64> },
    Exhausted { spent: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarVerdict {
    pub outcome: Outcome,
    pub witness: Witness,
    pub evals: usize,
}

impl StarVerdict {
    pub fn is_member(&self) -> bool {
        self.outcome == Outcome::Member
    }
}

/// Extrinsic neighbourhood of a boundary point: a chart ball intersected with the closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub center: BoundaryPoint,
    pub radius: f64,
}

impl Neighborhood {
    pub fn contains(&self, space: &ModelSpace, p: &Point) -> Result<bool> {
        let ch = Chart::new(space);
        let c = ch.to_chart(p)?;
        let e = ch.boundary_to_chart(&self.center)?;
        Ok(dist(&c, &e) < self.radius)
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn unit_towards(from: &[f64], to: &[f64]) -> Option<Vec<f64>> {
    let n = dist(from, to);
    (n > 0.0).then(|| from.iter().zip(to).map(|(a, b)| (b - a) / n).collect())
}

fn along(c: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    c.iter().zip(dir).map(|(a, b)| a + t * b).collect()
}

/// `min_{w ∈ W} d(z, w) ≤ d(z, x₀) + C`.
pub fn halfspace_membership(space: &ModelSpace, w: &[Point], c: f64, z: &Point) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::Invalid("W must be nonempty".into()));
    }
    let mut best = f64::INFINITY;
    for p in w {
        best = best.min(space.distance(z, p)?);
    }
    Ok(best <= space.distance(z, &space.basepoint)? + c)
}

struct Budgeted<'a> {
    space: &'a ModelSpace,
    chart: Chart<'a>,
    weight: f64,
    evals: usize,
    cap: usize,
}

struct Exhausted;

impl Budgeted<'_> {
    fn d(&mut self, a: &Point, b: &Point) -> std::result::Result<f64, Exhausted> {
        if self.evals >= self.cap {
            return Err(Exhausted);
        }
        self.evals += 1;
        Ok(self.space.d(a, b))
    }

    /// Minimises `d(y, x)` over interior `x` within chart distance `r` of `cxi`.
    fn closest_in_ball(
        &mut self,
        y: &Point,
        cy: &[f64],
        cxi: &[f64],
        c0: &[f64],
        r: f64,
    ) -> std::result::Result<(f64, Point), Exhausted> {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        let inward = unit_towards(cxi, c0);
        let toward_y = unit_towards(cxi, cy);
        if let Some(u) = &inward {
            dirs.push(u.clone());
        }
        if let Some(v) = &toward_y {
            dirs.push(v.clone());
            if let Some(u) = &inward {
                let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
                if let Some(m) = unit_towards(&vec![0.0; mid.len()], &mid) {
                    dirs.push(m);
                }
            }
        }
        let mut best: Option<(f64, Vec<f64>, Point, f64)> = None;
        for dir in &dirs {
            let mut len = 0.99 * r;
            while len > r * 1e-8 {
                let c = along(cxi, dir, len);
                if let Some(p) = self.chart.from_chart(&c) {
                    let v = self.d(y, &p)?;
                    if best.as_ref().is_none_or(|b| v < b.0) {
                        best = Some((v, c, p, len));
                    }
                }
                len *= 0.25;
            }
        }
        let Some((mut fbest, mut cbest, mut pbest, len)) = best else {
            return Ok((f64::INFINITY, y.clone()));
        };
        let basis = self.chart.tangent_basis();
        let mut h = 0.5 * len;
        let hmin = len * 1e-6;
        let mut polls = 0;
        while h > hmin && polls < 80 {
            let mut improved = false;
            'poll: for b in &basis {
                for sign in [1.0, -1.0] {
                    let mut c = along(&cbest, b, sign * h);
                    let off = dist(&c, cxi);
                    if off >= r {
                        let k = 0.999_999 * r / off;
                        c = cxi.iter().zip(&c).map(|(o, v)| o + k * (v - o)).collect();
                    }
                    let Some(p) = self.chart.from_chart(&c) else { continue };
                    polls += 1;
                    let v = self.d(y, &p)?;
                    if v < fbest {
                        fbest = v;
                        cbest = c;
                        pbest = p;
                        improved = true;
                        break 'poll;
                    }
                }
            }
            if improved {
                h = (2.0 * h).min(r);
            } else {
                h *= 0.5;
            }
        }
        Ok((fbest, pbest))
    }
}

/// Margins of the sequence criterion along shrinking neighbourhoods.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    pub radii: Vec<f64>,
    pub margins: Vec<f64>,
    pub xs: Vec<Point>,
    pub ys: Vec<Point>,
    /// Largest Gromov product `(x|y)_{x₀}` among the witnesses.
    pub gromov: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Trend {
    /// Settles; carries the supremum of the recorded margins.
    Bounded(f64),
    Diverging,
    Unclear,
}

/// Approach points `y ∈ W_r`: from `η` toward the basepoint and toward
/// points between `ξ` and the basepoint, at chart depths `r²` and `r³/r₀`,
/// plus a tangential family running from `η` toward `ξ` with a quadratic
/// inward offset.
/// Chart depth below which points are too close to the boundary for `f64`.
const MIN_DEPTH: f64 = 1e-12;

fn approach_points(ch: &Chart, ceta: &[f64], cxi: &[f64], c0: &[f64], r: f64, r0: f64) -> Vec<(Vec<f64>, Point)> {
    let mut out = Vec::new();
    let lens = [r * r, r * r * r / r0];
    for t in [1.0, 0.5, 0.1] {
        let target: Vec<f64> = cxi.iter().zip(c0).map(|(a, b)| a + t * (b - a)).collect();
        let Some(dir) = unit_towards(ceta, &target) else { continue };
        for len in lens {
            let c = along(ceta, &dir, len);
            if ch.depth(&c) < MIN_DEPTH {
                continue;
            }
            if let Some(p) = ch.from_chart(&c) {
                out.push((c, p));
            }
        }
    }
    if let (Some(tan), Some(inward)) = (unit_towards(ceta, cxi), unit_towards(ceta, c0)) {
        for len in lens {
            let c = along(&along(ceta, &tan, len), &inward, len * len / r0);
            if ch.depth(&c) < MIN_DEPTH {
                continue;
            }
            if let Some(p) = ch.from_chart(&c) {
                out.push((c, p));
            }
        }
    }
    out
}

pub(crate) fn profile(
    space: &ModelSpace,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
    budget: &StarBudget,
    scales: usize,
) -> Result<std::result::Result<Profile, usize>> {
    let ch = Chart::new(space);
    let cxi = ch.boundary_to_chart(xi)?;
    let ceta = ch.boundary_to_chart(eta)?;
    let c0 = ch.to_chart(&space.basepoint)?;
    let x0 = space.basepoint.clone();
    let sep = dist(&cxi, &ceta);
    let r0 = (0.25f64).min(sep / 4.0).min(0.5 * ch.feature_size(&cxi)).min(0.5 * ch.feature_size(&ceta));
    let mut ev = Budgeted { space, chart: ch, weight: budget.basepoint_weight, evals: 0, cap: budget.max_evals };
    let mut prof = Profile {
        radii: Vec::new(),
        margins: Vec::new(),
        xs: Vec::new(),
        ys: Vec::new(),
        gromov: f64::NEG_INFINITY,
        evals: 0,
    };
    for k in 0..scales {
        let r = r0 * 0.5f64.powi(k as i32);
        let mut best: Option<(f64, Point, Point, f64, f64)> = None;
        for (cy, y) in approach_points(&ch, &ceta, &cxi, &c0, r, r0) {
            let step = (|| -> std::result::Result<_, Exhausted> {
                let dy0 = ev.d(&y, &x0)?;
                let (dyx, x) = ev.closest_in_ball(&y, &cy, &cxi, &c0, r)?;
                Ok((dyx - ev.weight * dy0, x, dyx, dy0))
            })();
            let Ok((m, x, dyx, dy0)) = step else { return Ok(Err(ev.evals)) };
            if best.as_ref().is_none_or(|b| m < b.0) {
                best = Some((m, x, y, dyx, dy0));
            }
        }
        let Some((m, x, y, dyx, dy0)) = best else { break };
        let dx0 = space.d(&x, &x0);
        prof.gromov = prof.gromov.max(0.5 * (dx0 + dy0 - dyx));
        prof.radii.push(r);
        prof.margins.push(m);
        prof.xs.push(x);
        prof.ys.push(y);
    }
    prof.evals = ev.evals;
    Ok(Ok(prof))
}

impl Profile {
    /// Classifies the margin profile in units of the metric scale. Recorded
    /// margins bound the true infimum from above, so a profile whose last
    /// three scales stay under the envelope of the earlier ones, or whose
    /// positive increments decay geometrically, certifies a finite `C`.
    pub(crate) fn trend(&self, scale: f64) -> Trend {
        let m: Vec<f64> = self.margins.iter().map(|v| v / scale).collect();
        if m.len() < 5 {
            return Trend::Unclear;
        }
        let n = m.len();
        let flat = 1e-3;
        let sup = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let early = m[..n - 3].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m[n - 3..].iter().all(|&v| v <= early + flat) {
            return Trend::Bounded(sup * scale);
        }
        let inc: Vec<f64> = m.windows(2).map(|w| w[1] - w[0]).collect();
        let k = inc.len();
        let settling = (k - 3..k).all(|i| inc[i] <= flat || inc[i] <= 0.7 * inc[i - 1]);
        if settling {
            let tail = if inc[k - 1] > 0.0 && inc[k - 2] > 0.0 {
                let rho = (inc[k - 1] / inc[k - 2]).min(0.7);
                inc[k - 1] * rho / (1.0 - rho)
            } else {
                0.0
            };
            return Trend::Bounded(sup.max(m[n - 1] + tail) * scale);
        }
        let last = &inc[k - 3..];
        let diverging = last.iter().all(|&d| d >= 0.02) && last[1] >= 0.75 * last[0] && last[2] >= 0.75 * last[1];
        if diverging {
            Trend::Diverging
        } else {
            Trend::Unclear
        }
    }
}

fn chart_equal(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<bool> {
    let ch = Chart::new(space);
    Ok(dist(&ch.boundary_to_chart(xi)?, &ch.boundary_to_chart(eta)?) < 1e-12)
}

fn require_boundary(space: &ModelSpace) -> Result<()> {
    if let SpaceKind::FiniteGraph(_) = space.kind {
        return Err(Error::unsupported("star_test", "finite_graph (empty ideal boundary)"));
    }
    Ok(())
}

fn verdict_from(prof: Profile, budget: &StarBudget, space: &ModelSpace, based: bool) -> StarVerdict {
    let evals = prof.evals;
    let tol_based = 0.05 * space.scale;
    match prof.trend(space.scale) {
        Trend::Bounded(sup) => {
            let c = if based {
                (sup <= tol_based).then_some(0.0)
            } else {
                budget.c_grid.iter().cloned().filter(|c| *c + 1e-12 >= sup).fold(None, |a: Option<f64>, c| {
                    Some(a.map_or(c, |a| a.min(c)))
                })
            };
            match c {
                Some(c) => StarVerdict {
                    outcome: Outcome::Member,
                    witness: Witness::Member { c, xs: prof.xs, ys: prof.ys },
                    evals,
                },
                None if based && sup > 2.0 * tol_based => StarVerdict {
                    outcome: Outcome::NonMember,
                    witness: Witness::NonMember {
                        radii: prof.radii,
                        margins: prof.margins,
                        compact_radius: prof.gromov.max(0.0),
                        c_max: 0.0,
                    },
                    evals,
                },
                None => StarVerdict {
                    outcome: Outcome::Inconclusive,
                    witness: Witness::Undecided { radii: prof.radii, margins: prof.margins },
                    evals,
                },
            }
        }
        Trend::Diverging => StarVerdict {
            outcome: Outcome::NonMember,
            witness: Witness::NonMember {
                radii: prof.radii,
                margins: prof.margins,
                compact_radius: prof.gromov.max(0.0),
                c_max: if based { 0.0 } else { budget.c_max() },
            },
            evals,
        },
        Trend::Unclear => StarVerdict {
            outcome: Outcome::Inconclusive,
            witness: Witness::Undecided { radii: prof.radii, margins: prof.margins },
            evals,
        },
    }
}

fn run(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint, budget: &StarBudget, based: bool) -> Result<StarVerdict> {
    require_boundary(space)?;
    space.check_boundary(xi)?;
    space.check_boundary(eta)?;
    if xi == eta || chart_equal(space, xi, eta)? {
        return Ok(StarVerdict { outcome: Outcome::Member, witness: Witness::Trivial, evals: 0 });
    }
    let base = match profile(space, xi, eta, budget, budget.scales)? {
        Ok(p) => verdict_from(p, budget, space, based),
        Err(spent) => {
            return Ok(StarVerdict {
                outcome: Outcome::Inconclusive,
                witness: Witness::Exhausted { spent },
                evals: spent,
            })
        }
    };
    if base.outcome != Outcome::Inconclusive {
        return Ok(base);
    }
    // extended level: more scales, only when the budget affords it
    let spent = base.evals;
    let extended = StarBudget { max_evals: budget.max_evals.saturating_sub(spent), ..budget.clone() };
    match profile(space, xi, eta, &extended, budget.scales + 4)? {
        Ok(p) => {
            let mut v = verdict_from(p, budget, space, based);
            v.evals += spent;
            Ok(v)
        }
        Err(more) => Ok(StarVerdict { evals: spent + more, ..base }),
    }
}

/// Sampling test for `η ∈ S(ξ)`.
pub fn star_test(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint, budget: &StarBudget) -> Result<StarVerdict> {
    run(space, xi, eta, budget, false)
}

/// Sampling test for `η ∈ S^{x₀}(ξ)`: the criterion with `C = 0`.
pub fn star_test_based(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint, budget: &StarBudget) -> Result<StarVerdict> {
    run(space, xi, eta, budget, true)
}

/// Sampling test for `η ∈ S^∨(ξ)`, i.e. `ξ ∈ S(η)`.
pub fn dual_star_test(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint, budget: &StarBudget) -> Result<StarVerdict> {
    star_test(space, eta, xi, budget)
}

#[cfg(test)]
mod tests;
