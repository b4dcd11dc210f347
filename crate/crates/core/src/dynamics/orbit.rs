//! Orbits, translation numbers, minimal displacement and Denjoy–Wolff limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cat0::fixed_point_bounded_orbit;
use super::maps::NonexpansiveMap;
use super::mobius::{self, FramedPoint, MobiusClass};
use crate::boundary::MetricFunctional;
use crate::spaces::{BoundaryPoint, Chart, ModelSpace, Point, SpaceKind};
use crate::{Result, BOUNDARY_GUARD, C64};

/// Orbit `x, f x, …, f^N x` with its displacement sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// Representable points; shorter than `displacements` when truncated.
    pub points: Vec<Point>,
    /// `d(x, f^n x)` for every `n ≤ N`.
    pub displacements: Vec<f64>,
    /// Extrinsic chart coordinates for every `n ≤ N` that could be tracked.
    pub extrinsic: Vec<Vec<f64>>,
    /// First index whose point came within the guard of the chart boundary.
    pub truncated_at: Option<usize>,
    /// True when computed in the exact normal form of a hyperbolic Möbius map.
    pub framed: bool,
    pub bounded: bool,
}

impl OrbitRecord {
    /// Largest index with a known displacement.
    pub fn horizon(&self) -> usize {
        self.displacements.len() - 1
    }

    pub fn last_point(&self) -> &Point {
        self.points.last().expect("orbit has its starting point")
    }
}

fn from_disk(space: &ModelSpace, z: C64) -> Point {
    match space.kind {
        SpaceKind::TorusTeichmueller => Point::HalfPlane(mobius::act(&mobius::cayley_inv(), z)),
        _ => Point::Disk(z),
    }
}

fn bounded_profile(a: &[f64]) -> bool {
    if a.len() < 3 {
        return true;
    }
    let peak = |k: usize| a[..k].iter().cloned().fold(0.0, f64::max);
    let len = a.len();
    let (quarter, mid, three) = (peak(len / 4), peak(len / 2), peak(3 * len / 4));
    let tail = peak(len);
    if tail <= mid + 1e-9 * (1.0 + mid) {
        return true;
    }
    // geometric settling: the last quarter adds a vanishing fraction of the second
    let late = tail - three;
    len >= 8 && late <= 1e-6 * (1.0 + tail) && late <= 0.1 * (mid - quarter)
}

pub(crate) fn framed_orbit(map: &NonexpansiveMap, x: &Point, n: usize) -> Option<(mobius::Frame, Vec<FramedPoint>)> {
    let frame = map.frame()?;
    let z = NonexpansiveMap::disk_coord(x)?;
    let p0 = frame.embed(z);
    Some((frame.clone(), (0..=n).map(|k| frame.step(p0, k as f64)).collect()))
}

/// Iterates `f` `n` times from `x`, stopping point output at the boundary guard.
pub fn iterate(map: &NonexpansiveMap, x: &Point, n: usize) -> Result<OrbitRecord> {
    let space = map.space();
    space.check(x)?;
    let chart = Chart::new(space);
    if let Some((frame, fps)) = framed_orbit(map, x, n) {
        let mut rec = OrbitRecord {
            points: Vec::new(),
            displacements: Vec::with_capacity(n + 1),
            extrinsic: Vec::with_capacity(n + 1),
            truncated_at: None,
            framed: true,
            bounded: false,
        };
        for (k, fp) in fps.iter().enumerate() {
            rec.displacements.push(mobius::Frame::distance(fps[0], *fp));
            let z = frame.to_disk(*fp);
            rec.extrinsic.push(vec![z.re, z.im]);
            if rec.truncated_at.is_none() {
                let p = if k == 0 { x.clone() } else { from_disk(space, z) };
                if 1.0 - z.norm() < BOUNDARY_GUARD || space.check(&p).is_err() {
                    rec.truncated_at = Some(k);
                } else {
                    rec.points.push(p);
                }
            }
        }
        return Ok(rec);
    }
    let mut rec = OrbitRecord {
        points: vec![x.clone()],
        displacements: vec![0.0],
        extrinsic: Vec::new(),
        truncated_at: None,
        framed: false,
        bounded: false,
    };
    if chart.supported() {
        rec.extrinsic.push(chart.to_chart(x)?);
    }
    let mut cur = x.clone();
    for k in 1..=n {
        let next = map.image(&cur);
        if space.check(&next).is_err() {
            rec.truncated_at = Some(k);
            break;
        }
        if chart.supported() {
            let c = chart.to_chart(&next)?;
            let depth = chart.depth(&c);
            rec.extrinsic.push(c);
            if depth < BOUNDARY_GUARD {
                rec.truncated_at = Some(k);
                break;
            }
        }
        rec.displacements.push(space.d(x, &next));
        rec.points.push(next.clone());
        cur = next;
    }
    rec.bounded = rec.truncated_at.is_none() && bounded_profile(&rec.displacements);
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauBracket {
    pub lo: f64,
    pub hi: f64,
    /// `min_n d(x, f^n x)/n` over the computed orbit.
    pub fekete: f64,
    /// Both ends come from a closed form for the family.
    pub exact: bool,
    /// Number of iterates used.
    pub horizon: usize,
}

impl TauBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn estimate(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Brackets `τ(f) = lim d(x, f^n x)/n`.
pub fn translation_number(map: &NonexpansiveMap, x: &Point, n: usize) -> Result<TauBracket> {
    let rec = iterate(map, x, n.max(1))?;
    let a = &rec.displacements;
    let m = rec.horizon();
    let fekete = (1..=m).map(|k| a[k] / k as f64).fold(f64::INFINITY, f64::min);
    let fekete = if fekete.is_finite() { fekete } else { 0.0 };
    if let Some(tau) = map.exact_tau() {
        return Ok(TauBracket { lo: tau, hi: tau, fekete, exact: true, horizon: m });
    }
    let half = m / 2;
    let heuristic = if m >= 2 { ((a[m] - a[half]) / (m - half) as f64).max(0.0) } else { 0.0 };
    Ok(TauBracket { lo: heuristic.min(fekete), hi: fekete, fekete, exact: false, horizon: m })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    /// Smallest `d(x, f x)` found.
    pub value: f64,
    pub argmin: Point,
    /// False when the search was drawn toward the boundary (infimum not attained within budget).
    pub attained: bool,
}

/// Estimates `d(f) = inf_x d(x, f x)` by sampling and pattern search in the chart.
pub fn minimal_displacement(map: &NonexpansiveMap, samples: usize, seed: u64) -> Result<Displacement> {
    let space = map.space();
    if let SpaceKind::FiniteGraph(g) = &space.kind {
        let (v, d) = (0..g.vertices)
            .map(|v| (v, space.d(&Point::Vertex(v), &map.image(&Point::Vertex(v)))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("graph has a vertex");
        return Ok(Displacement { value: d, argmin: Point::Vertex(v), attained: true });
    }
    let chart = Chart::new(space);
    let disp = |p: &Point| space.d(p, &map.image(p));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<(f64, Point)> = vec![(disp(&space.basepoint), space.basepoint.clone())];
    for _ in 0..samples {
        let reach = [0.5, 0.9, 0.99][rng.gen_range(0..3)];
        let p = chart.sample_interior(&mut rng, reach);
        pool.push((disp(&p), p));
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    let basis = chart.tangent_basis();
    let mut best = pool[0].clone();
    for (v0, p0) in pool.into_iter().take(3) {
        let mut c = chart.to_chart(&p0)?;
        let mut v = v0;
        let mut step = 0.1;
        while step > 1e-12 {
            let mut moved = false;
            for b in &basis {
                for sign in [1.0, -1.0] {
                    let cand: Vec<f64> = c.iter().zip(b).map(|(x, d)| x + sign * step * d).collect();
                    if chart.depth(&cand) < 1e-12 {
                        continue;
                    }
                    if let Some(p) = chart.from_chart(&cand) {
                        let w = disp(&p);
                        if w < v {
                            v = w;
                            c = cand;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if v < best.0 {
            best = (v, chart.from_chart(&c).expect("search stays inside"));
        }
    }
    let depth = chart.depth(&chart.to_chart(&best.1)?);
    let attained = depth > 1e-6;
    Ok(Displacement { value: best.0, argmin: best.1, attained })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DenjoyWolff {
    FixedPoint { point: Point, residual: f64 },
    BoundaryLimit { xi: BoundaryPoint, extrinsic_gap: f64 },
    Undecided { reason: String },
}

fn snap_mobius(map: &NonexpansiveMap, c: &[f64], tol: f64) -> Option<BoundaryPoint> {
    let fixed = match map.mobius_class()? {
        MobiusClass::Hyperbolic { attracting, .. } => attracting,
        MobiusClass::Parabolic { fixed } => fixed,
        _ => return None,
    };
    if (fixed - C64::new(c[0], c[1])).norm() > tol {
        return None;
    }
    Some(match map.space().kind {
        SpaceKind::TorusTeichmueller => {
            let w = mobius::act(&mobius::cayley_inv(), fixed);
            if (fixed - C64::new(1.0, 0.0)).norm() < 1e-12 || !w.re.is_finite() {
                BoundaryPoint::HalfPlane(None)
            } else {
                BoundaryPoint::HalfPlane(Some(w.re))
            }
        }
        _ => BoundaryPoint::Disk(fixed),
    })
}

/// Classifies the orbit of `x`: interior fixed point, boundary limit, or undecided.
pub fn denjoy_wolff(map: &NonexpansiveMap, x: &Point, n: usize, tol: f64) -> Result<DenjoyWolff> {
    let space = map.space();
    let rec = iterate(map, x, n)?;
    if rec.truncated_at.is_none() && rec.points.len() >= 2 {
        let k = rec.points.len() - 1;
        let last = &rec.points[k];
        if space.d(&rec.points[k - 1], last) < tol {
            let residual = space.d(last, &map.image(last));
            if residual < tol {
                return Ok(DenjoyWolff::FixedPoint { point: last.clone(), residual });
            }
        }
    }
    if rec.bounded {
        if let SpaceKind::FiniteGraph(_) = space.kind {
            return Ok(match rec.points.iter().find(|p| map.image(p) == **p) {
                Some(p) => DenjoyWolff::FixedPoint { point: p.clone(), residual: 0.0 },
                None => DenjoyWolff::Undecided { reason: "periodic orbit without a fixed vertex".into() },
            });
        }
        if let Ok(fp) = fixed_point_bounded_orbit(map, x, n, tol) {
            if fp.residual < tol {
                return Ok(DenjoyWolff::FixedPoint { point: fp.point, residual: fp.residual });
            }
        }
        return Ok(DenjoyWolff::Undecided { reason: "bounded orbit without a certified fixed point".into() });
    }
    let chart = Chart::new(space);
    if !chart.supported() || rec.extrinsic.len() < 3 {
        return Ok(DenjoyWolff::Undecided { reason: "no extrinsic chart to follow".into() });
    }
    let m = rec.extrinsic.len() - 1;
    let (cn, ch) = (&rec.extrinsic[m], &rec.extrinsic[m / 2]);
    let gap = cn.iter().zip(ch).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let depth = chart.depth(cn).max(0.0);
    if depth >= tol || gap >= tol {
        return Ok(DenjoyWolff::Undecided { reason: format!("extrinsic tail not settled (gap {gap:.3e}, depth {depth:.3e})") });
    }
    let xi = match snap_mobius(map, cn, tol) {
        Some(xi) => xi,
        None => chart.project_to_boundary(cn)?,
    };
    Ok(DenjoyWolff::BoundaryLimit { xi, extrinsic_gap: gap })
}

/// `max_z h(f z) − h(z)` over chart samples; nonpositive for horoballs at the Denjoy–Wolff point.
pub fn horoball_drift(map: &NonexpansiveMap, h: &MetricFunctional, samples: usize, seed: u64) -> Result<f64> {
    let chart = Chart::new(map.space());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let reach = [0.5, 0.9, 0.99][rng.gen_range(0..3)];
        let z = chart.sample_interior(&mut rng, reach);
        let fz = map.apply(&z)?;
        worst = worst.max(h.evaluate(&fz)? - h.evaluate(&z)?);
    }
    Ok(worst)
}
