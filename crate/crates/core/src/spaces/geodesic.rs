//! Unit-speed geodesics, rays and (1,κ)-almost geodesics.

use rand::Rng;

use super::chart::Chart;
use super::{hermitian, norm_sqr, BoundaryPoint, ModelSpace, Norm, Point, SpaceKind};
use crate::{Error, Result, C64};

/// Disk automorphism `w ↦ (w + x) / (1 + x̄ w)` sending 0 to `x`.
pub(crate) fn disk_translate(x: C64, w: C64) -> C64 {
    (w + x) / (C64::new(1.0, 0.0) + x.conj() * w)
}

/// Ball involution exchanging `a` and 0.
pub(crate) fn ball_involution(a: &[C64], z: &[C64]) -> Vec<C64> {
    let aa = norm_sqr(a);
    let za = hermitian(z, a);
    let denom = C64::new(1.0, 0.0) - za;
    if aa == 0.0 {
        return z.iter().map(|v| -v).collect();
    }
    let s = (1.0 - aa).sqrt();
    let coef = za / aa;
    a.iter()
        .zip(z)
        .map(|(ai, zi)| {
            let p = coef * ai;
            let q = zi - p;
            (ai - p - s * q) / denom
        })
        .collect()
}

fn cayley(z: C64) -> C64 {
    (z - C64::i()) / (z + C64::i())
}

fn inv_cayley(w: C64) -> C64 {
    C64::i() * (C64::new(1.0, 0.0) + w) / (C64::new(1.0, 0.0) - w)
}

fn unit(z: C64) -> C64 {
    z / z.norm()
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Constant(Point),
    /// `φ_x(tanh t · u)` in the disk; `half_plane` maps the result back by Cayley.
    Disk { x: C64, u: C64, half_plane: bool },
    Ball { a: Vec<C64>, u: Vec<C64> },
    /// Coordinatewise disk paths with speeds `≤ 1` and stopping times.
    Polydisc { coords: Vec<(C64, C64, f64, f64)> },
    Line { x: Vec<f64>, v: Vec<f64> },
    /// Chord `x + s (y - x)` with exit parameters `t-`, `t+`.
    Chord { x: Vec<f64>, y: Vec<f64>, tm: f64, tp: f64, bary: bool },
    Graph { path: Vec<usize>, cum: Vec<f64> },
}

/// Path `σ: [0, T] → X` with additive slack `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostGeodesic {
    rule: Rule,
    /// Parameter length `T` (infinite for rays).
    pub length: f64,
    pub kappa: f64,
    scale: f64,
}

impl AlmostGeodesic {
    pub fn is_ray(&self) -> bool {
        self.length.is_infinite()
    }

    /// Point at parameter `t`, clamped to `[0, T]`.
    pub fn at(&self, t: f64) -> Point {
        let t = t.clamp(0.0, self.length) / self.scale;
        match &self.rule {
            Rule::Constant(p) => p.clone(),
            Rule::Disk { x, u, half_plane } => {
                let w = disk_translate(*x, t.tanh() * u);
                if *half_plane {
                    Point::HalfPlane(inv_cayley(w))
                } else {
                    Point::Disk(w)
                }
            }
            Rule::Ball { a, u } => {
                let r = t.tanh();
                let z: Vec<C64> = u.iter().map(|v| v * r).collect();
                Point::Ball(ball_involution(a, &z))
            }
            Rule::Polydisc { coords } => Point::Polydisc(
                coords
                    .iter()
                    .map(|(x, u, speed, stop)| disk_translate(*x, (speed * t).min(*stop).tanh() * u))
                    .collect(),
            ),
            Rule::Line { x, v } => Point::Normed(x.iter().zip(v).map(|(a, b)| a + t * b).collect()),
            Rule::Chord { x, y, tm, tp, bary } => {
                let e = (2.0 * t).exp();
                let s = if tp.is_infinite() {
                    tm * (1.0 - e) / -e
                } else if e.is_infinite() {
                    *tp
                } else {
                    tm * tp * (1.0 - e) / (tp - e * tm)
                };
                let mut p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + s * (b - a)).collect();
                if *bary {
                    let sum: f64 = p.iter().sum();
                    p.iter_mut().for_each(|v| *v /= sum);
                }
                Point::Polytope(p)
            }
            Rule::Graph { path, cum } => {
                let t = t * self.scale;
                let k = cum.iter().rposition(|&c| c <= t + 1e-12).unwrap_or(0);
                Point::Vertex(path[k])
            }
        }
    }

    pub fn start(&self) -> Point {
        self.at(0.0)
    }

    pub fn end(&self) -> Point {
        self.at(self.length)
    }

    /// Times of the vertices visited by a discrete graph path.
    pub fn vertex_times(&self) -> Option<Vec<f64>> {
        match &self.rule {
            Rule::Graph { cum, .. } => Some(cum.clone()),
            _ => None,
        }
    }

    /// Checks the (1,κ) inequality on random parameter pairs, using `horizon`
    /// in place of an infinite length. Returns the worst slack observed.
    pub fn worst_slack(&self, space: &ModelSpace, rng: &mut impl Rng, pairs: usize, horizon: f64) -> f64 {
        let top = self.length.min(horizon);
        let times: Vec<(f64, f64)> = match self.vertex_times() {
            Some(c) => (0..pairs)
                .map(|_| (c[rng.gen_range(0..c.len())], c[rng.gen_range(0..c.len())]))
                .collect(),
            None => (0..pairs).map(|_| (rng.gen::<f64>() * top, rng.gen::<f64>() * top)).collect(),
        };
        times
            .into_iter()
            .map(|(s, t)| (space.d(&self.at(s), &self.at(t)) - (s - t).abs()).abs())
            .fold(0.0, f64::max)
    }

    /// Approximate `min_t d(p, σ(t))` by a grid scan refined by golden section.
    pub fn min_distance_to(&self, space: &ModelSpace, p: &Point, horizon: f64) -> f64 {
        let top = self.length.min(horizon);
        if let Some(c) = self.vertex_times() {
            return c.iter().map(|&t| space.d(p, &self.at(t))).fold(f64::INFINITY, f64::min);
        }
        let n = 256;
        let f = |t: f64| space.d(p, &self.at(t));
        let (mut best_i, mut best) = (0, f64::INFINITY);
        for i in 0..=n {
            let v = f(top * i as f64 / n as f64);
            if v < best {
                best = v;
                best_i = i;
            }
        }
        let h = top / n as f64;
        let (mut a, mut b) = ((best_i as f64 - 1.0) * h, (best_i as f64 + 1.0) * h);
        a = a.max(0.0);
        b = b.min(top);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.min(f(0.5 * (a + b)))
    }
}

fn constant(space: &ModelSpace, x: &Point) -> AlmostGeodesic {
    AlmostGeodesic {
        rule: Rule::Constant(x.clone()),
        length: 0.0,
        kappa: 0.0,
        scale: space.scale,
    }
}

fn disk_rule(x: C64, y: C64, half_plane: bool) -> Rule {
    let w = disk_translate(-x, y);
    Rule::Disk { x, u: unit(w), half_plane }
}

fn ball_rule(a: &[C64], y: &[C64]) -> Rule {
    let w = ball_involution(a, y);
    let n = norm_sqr(&w).sqrt();
    Rule::Ball { a: a.to_vec(), u: w.into_iter().map(|v| v / n).collect() }
}

fn norm_of(norm: Norm, v: &[f64]) -> f64 {
    match norm {
        Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Exact unit-speed geodesic from `x` to `y`.
pub fn geodesic(space: &ModelSpace, x: &Point, y: &Point) -> Result<AlmostGeodesic> {
    let len = space.distance(x, y)?;
    if x == y {
        return Ok(constant(space, x));
    }
    let rule = match (&space.kind, x, y) {
        (_, Point::Disk(a), Point::Disk(b)) => disk_rule(*a, *b, false),
        (_, Point::HalfPlane(a), Point::HalfPlane(b)) => disk_rule(cayley(*a), cayley(*b), true),
        (_, Point::Ball(a), Point::Ball(b)) => ball_rule(a, b),
        (SpaceKind::NormedSpace { norm, .. }, Point::Normed(a), Point::Normed(b)) => {
            let v: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
            let n = norm_of(*norm, &v);
            Rule::Line { x: a.clone(), v: v.into_iter().map(|c| c / n).collect() }
        }
        (SpaceKind::HilbertPolytope(p), Point::Polytope(a), Point::Polytope(b)) => {
            let (tm, tp) = p.chord(a, b);
            Rule::Chord { x: a.clone(), y: b.clone(), tm, tp, bary: p.barycentric }
        }
        (SpaceKind::FiniteGraph(g), Point::Vertex(a), Point::Vertex(b)) => {
            let path = g.shortest_path(*a, *b);
            let mut cum = vec![0.0];
            for w in path.windows(2) {
                cum.push(cum.last().unwrap() + space.scale * g.distance(w[0], w[1]));
            }
            Rule::Graph { path, cum }
        }
        (SpaceKind::Polydisc { .. }, _, _) => {
            return Err(Error::unsupported("geodesic", "polydisc (use almost_geodesic)"))
        }
        _ => return Err(Error::Mismatch),
    };
    Ok(AlmostGeodesic { rule, length: len, kappa: 0.0, scale: space.scale })
}

/// Path with slack `κ > 0`; validated on sampled parameter pairs before return.
pub fn almost_geodesic(space: &ModelSpace, x: &Point, y: &Point, kappa: f64) -> Result<AlmostGeodesic> {
    if !(kappa > 0.0) {
        return Err(Error::Invalid("almost_geodesic needs κ > 0".into()));
    }
    let mut path = match (&space.kind, x, y) {
        (SpaceKind::Polydisc { .. }, Point::Polydisc(a), Point::Polydisc(b)) => {
            space.check(x)?;
            space.check(y)?;
            let ds: Vec<f64> = a.iter().zip(b).map(|(p, q)| super::disk_distance(*p, *q)).collect();
            let t_max = ds.iter().cloned().fold(0.0, f64::max);
            if t_max == 0.0 {
                constant(space, x)
            } else {
                let coords = a
                    .iter()
                    .zip(b)
                    .zip(&ds)
                    .map(|((p, q), d)| {
                        let w = disk_translate(-*p, *q);
                        let u = if w.norm() > 0.0 { unit(w) } else { C64::new(1.0, 0.0) };
                        (*p, u, d / t_max, f64::INFINITY)
                    })
                    .collect();
                AlmostGeodesic {
                    rule: Rule::Polydisc { coords },
                    length: space.scale * t_max,
                    kappa: 0.0,
                    scale: space.scale,
                }
            }
        }
        _ => geodesic(space, x, y)?,
    };
    path.kappa = kappa;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    if path.worst_slack(space, &mut rng, 100, f64::INFINITY) > kappa {
        return Err(Error::Validation("almost-geodesic failed the (1,κ) check".into()));
    }
    Ok(path)
}

use rand::SeedableRng;

/// Unit-speed geodesic ray from `x` converging to `ξ` in the extrinsic chart.
pub fn geodesic_ray(space: &ModelSpace, x: &Point, xi: &BoundaryPoint) -> Result<AlmostGeodesic> {
    space.check(x)?;
    space.check_boundary(xi)?;
    let rule = match (&space.kind, x, xi) {
        (_, Point::Disk(a), BoundaryPoint::Disk(b)) => Rule::Disk {
            x: *a,
            u: unit(disk_translate(-*a, *b)),
            half_plane: false,
        },
        (_, Point::HalfPlane(a), BoundaryPoint::HalfPlane(t)) => {
            let b = match t {
                None => C64::new(1.0, 0.0),
                Some(t) => cayley(C64::new(*t, 0.0)),
            };
            let x = cayley(*a);
            Rule::Disk { x, u: unit(disk_translate(-x, b)), half_plane: true }
        }
        (_, Point::Ball(a), BoundaryPoint::Ball(b)) => ball_rule(a, b),
        (SpaceKind::Polydisc { .. }, Point::Polydisc(a), BoundaryPoint::Polydisc { coords, unimodular }) => {
            let coords = a
                .iter()
                .zip(coords)
                .enumerate()
                .map(|(i, (p, q))| {
                    let w = disk_translate(-*p, *q);
                    if unimodular.contains(&i) {
                        (*p, unit(w), 1.0, f64::INFINITY)
                    } else if w.norm() == 0.0 {
                        (*p, C64::new(1.0, 0.0), 0.0, 0.0)
                    } else {
                        (*p, unit(w), 1.0, w.norm().atanh())
                    }
                })
                .collect();
            Rule::Polydisc { coords }
        }
        (SpaceKind::NormedSpace { norm, .. }, Point::Normed(a), BoundaryPoint::Direction(u)) => {
            let n = norm_of(*norm, u);
            Rule::Line { x: a.clone(), v: u.iter().map(|c| c / n).collect() }
        }
        (SpaceKind::HilbertPolytope(p), Point::Polytope(a), BoundaryPoint::Polytope { coords, .. }) => {
            let (tm, _) = p.chord(a, coords);
            Rule::Chord { x: a.clone(), y: coords.clone(), tm, tp: 1.0, bary: p.barycentric }
        }
        (SpaceKind::FiniteGraph(_), _, _) => return Err(Error::unsupported("geodesic_ray", "finite_graph")),
        _ => return Err(Error::Mismatch),
    };
    Ok(AlmostGeodesic { rule, length: f64::INFINITY, kappa: 0.0, scale: space.scale })
}

impl Chart<'_> {
    /// Convenience: chart coordinates of a ray at time `t`.
    pub fn ray_chart(&self, ray: &AlmostGeodesic, t: f64) -> Result<Vec<f64>> {
        self.to_chart(&ray.at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::tests::catalog;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disk_midpoint_of_symmetric_pair_is_origin() {
        let s = ModelSpace::disk();
        let g = geodesic(&s, &Point::Disk(C64::new(-0.5, 0.0)), &Point::Disk(C64::new(0.5, 0.0))).unwrap();
        let Point::Disk(m) = g.at(g.length / 2.0) else { panic!() };
        assert!(m.norm() < 1e-12);
    }

    #[test]
    fn l2_segment_is_linear() {
        let s = ModelSpace::normed(2, Norm::L2).unwrap();
        let g = geodesic(&s, &Point::Normed(vec![0.0, 0.0]), &Point::Normed(vec![1.0, 0.0])).unwrap();
        assert!((g.length - 1.0).abs() < 1e-15);
        assert_eq!(g.at(0.3), Point::Normed(vec![0.3, 0.0]));
    }

    #[test]
    fn half_plane_vertical_segment() {
        let s = ModelSpace::half_plane();
        let g = geodesic(&s, &Point::HalfPlane(C64::new(0.0, 1.0)), &Point::HalfPlane(C64::new(0.0, 2.0))).unwrap();
        for k in 0..=10 {
            let Point::HalfPlane(z) = g.at(g.length * k as f64 / 10.0) else { panic!() };
            assert!(z.re.abs() < 1e-12);
            // the vertical line oracle: Im grows like exp(2t) under the half-distance convention
            let t = g.length * k as f64 / 10.0;
            assert!((z.im - (2.0 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn geodesics_are_unit_speed_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in catalog() {
            if matches!(s.kind, SpaceKind::Polydisc { .. }) {
                continue;
            }
            let ch = Chart::new(&s);
            for _ in 0..30 {
                let x = ch.sample_interior(&mut rng, 0.95);
                let y = ch.sample_interior(&mut rng, 0.95);
                let g = geodesic(&s, &x, &y).unwrap();
                assert!(s.d(&g.end(), &y) < 1e-7, "{} endpoint", s.name());
                assert!(g.worst_slack(&s, &mut rng, 50, f64::INFINITY) < 1e-8, "{}", s.name());
            }
        }
    }

    #[test]
    fn polydisc_needs_slack() {
        let s = ModelSpace::polydisc(2).unwrap();
        let x = Point::Polydisc(vec![C64::new(0.0, 0.0); 2]);
        let y = Point::Polydisc(vec![C64::new(0.9, 0.0), C64::new(0.0, 0.5)]);
        assert!(matches!(geodesic(&s, &x, &y), Err(Error::Unsupported { .. })));
        let g = almost_geodesic(&s, &x, &y, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(g.worst_slack(&s, &mut rng, 100, f64::INFINITY) <= 0.2);
        assert!(s.d(&g.end(), &y) < 1e-9);
        assert!(almost_geodesic(&s, &x, &y, 0.0).is_err());
    }

    #[test]
    fn rays_are_unit_speed_and_reach_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in catalog().into_iter().filter(|s| Chart::new(s).supported()) {
            let ch = Chart::new(&s);
            for _ in 0..10 {
                let x = ch.sample_interior(&mut rng, 0.5);
                let xi = ch.sample_boundary(&mut rng).unwrap();
                let r = geodesic_ray(&s, &x, &xi).unwrap();
                assert!(r.worst_slack(&s, &mut rng, 50, 8.0) < 1e-7, "{}", s.name());
                let far = ch.to_chart(&r.at(12.0)).unwrap();
                let target = ch.boundary_to_chart(&xi).unwrap();
                let gap: f64 = far.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if !matches!(s.kind, SpaceKind::NormedSpace { .. }) {
                    assert!(gap < 1e-3, "{} gap {gap}", s.name());
                }
            }
        }
    }
}
