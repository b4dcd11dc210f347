//! Circumcenters in CAT(0) models, fixed points from bounded orbits and
//! geodesic tracking of unbounded orbits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::maps::NonexpansiveMap;
use super::mobius::{self, Frame};
use super::orbit::{framed_orbit, iterate, translation_number};
use crate::spaces::{geodesic_ray, BoundaryPoint, Chart, ModelSpace, Norm, Point, SpaceKind};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, PartialEq)]
enum Geometry {
    Euclidean,
    /// Hyperboloid model of curvature −1.
    Hyperbolic,
}

struct Ball {
    center: Vec<f64>,
    /// Monotone proxy of the radius.
    reach: f64,
}

fn lorentz(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Geometry {
    /// Increasing function of distance: squared length or `cosh` of the curvature −1 distance.
    fn proxy(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Geometry::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum(),
            Geometry::Hyperbolic => -lorentz(a, b),
        }
    }

    fn max_support(self, dim: usize) -> usize {
        match self {
            Geometry::Euclidean => dim + 1,
            Geometry::Hyperbolic => 3,
        }
    }

    /// Smallest ball with every support point on its boundary.
    fn circumscribe(self, s: &[Vec<f64>]) -> Option<Ball> {
        match s.len() {
            0 => None,
            1 => Some(Ball { center: s[0].clone(), reach: self.proxy(&s[0], &s[0]) }),
            k => match self {
                Geometry::Euclidean => {
                    let a: Vec<Vec<f64>> = s[1..].iter().map(|p| p.iter().zip(&s[0]).map(|(x, y)| x - y).collect()).collect();
                    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
                    let m: Vec<Vec<f64>> = a.iter().map(|u| a.iter().map(|v| 2.0 * dot(u, v)).collect()).collect();
                    let b: Vec<f64> = a.iter().map(|u| dot(u, u)).collect();
                    let mu = solve(m, b)?;
                    let mut c = s[0].clone();
                    for (u, w) in a.iter().zip(&mu) {
                        c.iter_mut().zip(u).for_each(|(ci, ui)| *ci += w * ui);
                    }
                    let reach = self.proxy(&c, &s[0]);
                    Some(Ball { center: c, reach })
                }
                Geometry::Hyperbolic => {
                    let g: Vec<Vec<f64>> = s.iter().map(|p| s.iter().map(|q| -lorentz(p, q)).collect()).collect();
                    let lambda = solve(g, vec![1.0; k])?;
                    let mut c = vec![0.0; 3];
                    for (p, l) in s.iter().zip(&lambda) {
                        c.iter_mut().zip(p).for_each(|(ci, pi)| *ci += l * pi);
                    }
                    let n = -lorentz(&c, &c);
                    if !(n > 0.0) {
                        return None;
                    }
                    let sign = if c[0] > 0.0 { 1.0 } else { -1.0 };
                    let c: Vec<f64> = c.iter().map(|v| sign * v / n.sqrt()).collect();
                    let reach = self.proxy(&c, &s[0]);
                    Some(Ball { center: c, reach })
                }
            },
        }
    }
}

/// Gaussian elimination with partial pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-13 * scale {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Some(x)
}

fn inside(geo: Geometry, ball: &Option<Ball>, p: &[f64]) -> bool {
    ball.as_ref().is_some_and(|b| {
        let r = geo.proxy(&b.center, p);
        match geo {
            Geometry::Euclidean => r <= b.reach * (1.0 + 1e-12) + 1e-300,
            Geometry::Hyperbolic => r <= b.reach + 1e-12 * b.reach,
        }
    })
}

/// Move-to-front form of Welzl's algorithm.
fn welzl(geo: Geometry, pts: &mut Vec<Vec<f64>>, end: usize, support: &mut Vec<Vec<f64>>, cap: usize) -> Option<Ball> {
    let mut ball = geo.circumscribe(support);
    if support.len() == cap {
        return ball;
    }
    let mut i = 0;
    while i < end {
        if !inside(geo, &ball, &pts[i]) {
            support.push(pts[i].clone());
            let candidate = welzl(geo, pts, i, support, cap);
            support.pop();
            if candidate.is_some() {
                ball = candidate;
            }
            let p = pts.remove(i);
            pts.insert(0, p);
        }
        i += 1;
    }
    ball
}

fn disk_to_hyperboloid(z: C64) -> Vec<f64> {
    let s = 1.0 - z.norm_sqr();
    vec![(1.0 + z.norm_sqr()) / s, 2.0 * z.re / s, 2.0 * z.im / s]
}

fn hyperboloid_to_disk(p: &[f64]) -> C64 {
    C64::new(p[1], p[2]) / (1.0 + p[0])
}

/// Center and radius of the smallest closed ball containing `points`.
pub fn circumcenter(space: &ModelSpace, points: &[Point]) -> Result<(Point, f64)> {
    if points.is_empty() {
        return Err(Error::Invalid("circumcenter of an empty set".into()));
    }
    points.iter().try_for_each(|p| space.check(p))?;
    let (geo, dim) = match &space.kind {
        SpaceKind::NormedSpace { dim, norm: Norm::L2 } => (Geometry::Euclidean, *dim),
        SpaceKind::PoincareDisk | SpaceKind::TorusTeichmueller => (Geometry::Hyperbolic, 2),
        _ => return Err(Error::unsupported("circumcenter", space.name())),
    };
    let mut pts: Vec<Vec<f64>> = points
        .iter()
        .map(|p| match p {
            Point::Normed(x) => x.clone(),
            Point::Disk(z) => disk_to_hyperboloid(*z),
            Point::HalfPlane(w) => disk_to_hyperboloid(mobius::act(&mobius::cayley(), *w)),
            _ => unreachable!("checked above"),
        })
        .collect();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    let n = pts.len();
    let ball = welzl(geo, &mut pts, n, &mut Vec::new(), geo.max_support(dim))
        .ok_or_else(|| Error::Validation("degenerate support set".into()))?;
    let center = match (&space.kind, geo) {
        (SpaceKind::NormedSpace { .. }, _) => Point::Normed(ball.center),
        (SpaceKind::TorusTeichmueller, _) => {
            Point::HalfPlane(mobius::act(&mobius::cayley_inv(), hyperboloid_to_disk(&ball.center)))
        }
        _ => Point::Disk(hyperboloid_to_disk(&ball.center)),
    };
    space.check(&center)?;
    let radius = points.iter().map(|p| space.d(&center, p)).fold(0.0, f64::max);
    Ok((center, radius))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub point: Point,
    /// `d(p, f p)`.
    pub residual: f64,
    pub rounds: usize,
}

/// Fixed point of a map with a bounded orbit, as the limit of orbit circumcenters.
pub fn fixed_point_bounded_orbit(map: &NonexpansiveMap, x: &Point, n: usize, tol: f64) -> Result<FixedPointResult> {
    let space = map.space();
    let rec = iterate(map, x, n)?;
    if !rec.bounded {
        return Err(Error::Validation("orbit is not bounded".into()));
    }
    let tail = &rec.points[rec.points.len() / 2..];
    let (mut p, _) = circumcenter(space, tail)?;
    let mut residual = space.d(&p, &map.image(&p));
    let mut rounds = 0;
    while residual >= tol && rounds < 50 {
        rounds += 1;
        let orbit = iterate(map, &p, n.min(256))?;
        let (q, _) = circumcenter(space, &orbit.points)?;
        let r = space.d(&q, &map.image(&q));
        if r >= residual {
            break;
        }
        p = q;
        residual = r;
    }
    Ok(FixedPointResult { point: p, residual, rounds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    /// False when `τ ≈ 0`, where no ray is tracked.
    pub applicable: bool,
    pub tau: f64,
    pub endpoint: Option<BoundaryPoint>,
    /// `(n, d(f^n x, γ(τ n)) / n)` at doubling checkpoints and at `N`.
    pub residuals: Vec<(usize, f64)>,
    pub tracked: bool,
}

fn checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|k| *k < n).collect();
    out.push(n);
    out
}

/// Fits the ray from `x` toward the far orbit and reports `r_n = d(f^n x, γ(τ n))/n`.
pub fn geodesic_tracking(map: &NonexpansiveMap, x: &Point, n: usize, tol: f64) -> Result<Tracking> {
    let space = map.space();
    match space.kind {
        SpaceKind::NormedSpace { norm: Norm::L2, .. } | SpaceKind::PoincareDisk | SpaceKind::TorusTeichmueller => {}
        _ => return Err(Error::unsupported("geodesic_tracking", space.name())),
    }
    let tau = translation_number(map, x, n)?.hi;
    let mut out = Tracking { applicable: tau > 1e-9, tau, endpoint: None, residuals: Vec::new(), tracked: false };
    if !out.applicable {
        return Ok(out);
    }
    if let Some((frame, fps)) = framed_orbit(map, x, n) {
        for k in checkpoints(n) {
            let r = Frame::distance(fps[k], Frame::ray(fps[0], tau * k as f64)) / k as f64;
            out.residuals.push((k, r));
        }
        let a = frame.attracting;
        out.endpoint = Some(match space.kind {
            SpaceKind::TorusTeichmueller if (a - C64::new(1.0, 0.0)).norm() < 1e-12 => BoundaryPoint::HalfPlane(None),
            SpaceKind::TorusTeichmueller => BoundaryPoint::HalfPlane(Some(mobius::act(&mobius::cayley_inv(), a).re)),
            _ => BoundaryPoint::Disk(a),
        });
    } else {
        let rec = iterate(map, x, n)?;
        let m = rec.points.len() - 1;
        let far = &rec.points[m];
        let xi = match (x, far) {
            (Point::Normed(a), Point::Normed(b)) => {
                let v: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
                let len = v.iter().map(|t| t * t).sum::<f64>().sqrt();
                BoundaryPoint::Direction(v.iter().map(|t| t / len).collect())
            }
            _ => Chart::new(space).project_to_boundary(rec.extrinsic.last().expect("chart exists"))?,
        };
        let ray = geodesic_ray(space, x, &xi)?;
        for k in checkpoints(m) {
            let r = space.d(&rec.points[k], &ray.at(tau * k as f64)) / k as f64;
            out.residuals.push((k, r));
        }
        out.endpoint = Some(xi);
    }
    let rs: Vec<f64> = out.residuals.iter().map(|r| r.1).collect();
    let tail = &rs[rs.len().saturating_sub(3)..];
    let settling = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    out.tracked = *rs.last().expect("at least one checkpoint") < tol && settling;
    Ok(out)
}
