//! Extrinsic chart: every space except graphs is identified with a bounded
//! convex region of some `R^m` whose topological boundary is the ideal boundary.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{norm_sqr, BoundaryPoint, ModelSpace, Point, SpaceKind};
use crate::{Error, Result, C64};

pub type ChartVec = Vec<f64>;

const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Chart<'a> {
    space: &'a ModelSpace,
}

fn cayley(z: C64) -> C64 {
    let i = C64::i();
    (z - i) / (z + i)
}

fn inv_cayley(w: C64) -> C64 {
    let i = C64::i();
    i * (C64::new(1.0, 0.0) + w) / (C64::new(1.0, 0.0) - w)
}

fn flatten(z: &[C64]) -> ChartVec {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn unflatten(c: &[f64]) -> Vec<C64> {
    c.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Smallest positive root `t` of `|a + t v|² = 1` for `|a| < 1`.
fn sphere_exit(a: &[f64], v: &[f64]) -> f64 {
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let av: f64 = a.iter().zip(v).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    if vv == 0.0 {
        return f64::INFINITY;
    }
    (-av + (av * av + vv * (1.0 - aa)).max(0.0).sqrt()) / vv
}

impl<'a> Chart<'a> {
    pub fn new(space: &'a ModelSpace) -> Self {
        Chart { space }
    }

    pub fn space(&self) -> &'a ModelSpace {
        self.space
    }

    pub fn supported(&self) -> bool {
        !matches!(self.space.kind, SpaceKind::FiniteGraph(_))
    }

    fn graph_err<T>(&self) -> Result<T> {
        Err(Error::unsupported("extrinsic chart", "finite_graph"))
    }

    pub fn dim(&self) -> usize {
        match &self.space.kind {
            SpaceKind::PoincareDisk | SpaceKind::TorusTeichmueller => 2,
            SpaceKind::KobayashiBall { dim } | SpaceKind::Polydisc { dim } => 2 * dim,
            SpaceKind::HilbertPolytope(p) => p.dim(),
            SpaceKind::NormedSpace { dim, .. } => *dim,
            SpaceKind::FiniteGraph(_) => 0,
        }
    }

    pub fn to_chart(&self, p: &Point) -> Result<ChartVec> {
        self.space.check(p)?;
        Ok(match p {
            Point::Disk(z) => vec![z.re, z.im],
            Point::Ball(z) | Point::Polydisc(z) => flatten(z),
            Point::Polytope(x) => x.clone(),
            Point::Normed(x) => {
                let n = l2(x);
                x.iter().map(|v| v / (1.0 + n)).collect()
            }
            Point::HalfPlane(z) => {
                let w = cayley(*z);
                vec![w.re, w.im]
            }
            Point::Vertex(_) => return self.graph_err(),
        })
    }

    /// Interior point at chart coordinates `c`, or `None` outside the region.
    pub fn from_chart(&self, c: &[f64]) -> Option<Point> {
        if c.len() != self.dim() || c.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let p = match &self.space.kind {
            SpaceKind::PoincareDisk => Point::Disk(C64::new(c[0], c[1])),
            SpaceKind::KobayashiBall { .. } => Point::Ball(unflatten(c)),
            SpaceKind::Polydisc { .. } => Point::Polydisc(unflatten(c)),
            SpaceKind::HilbertPolytope(poly) => {
                if poly.barycentric {
                    let s: f64 = c.iter().sum();
                    Point::Polytope(c.iter().map(|v| v / s).collect())
                } else {
                    Point::Polytope(c.to_vec())
                }
            }
            SpaceKind::NormedSpace { .. } => {
                let n = l2(c);
                if n >= 1.0 {
                    return None;
                }
                Point::Normed(c.iter().map(|v| v / (1.0 - n)).collect())
            }
            SpaceKind::TorusTeichmueller => {
                let w = C64::new(c[0], c[1]);
                if w.norm_sqr() >= 1.0 {
                    return None;
                }
                Point::HalfPlane(inv_cayley(w))
            }
            SpaceKind::FiniteGraph(_) => return None,
        };
        self.space.check(&p).ok().map(|_| p)
    }

    pub fn boundary_to_chart(&self, b: &BoundaryPoint) -> Result<ChartVec> {
        self.space.check_boundary(b)?;
        Ok(match b {
            BoundaryPoint::Disk(z) => vec![z.re, z.im],
            BoundaryPoint::Ball(z) => flatten(z),
            BoundaryPoint::Polydisc { coords, .. } => flatten(coords),
            BoundaryPoint::Polytope { coords, .. } => coords.clone(),
            BoundaryPoint::Direction(u) => u.clone(),
            BoundaryPoint::HalfPlane(None) => vec![1.0, 0.0],
            BoundaryPoint::HalfPlane(Some(t)) => {
                let w = cayley(C64::new(*t, 0.0));
                vec![w.re, w.im]
            }
        })
    }

    /// Euclidean distance from `c` to the boundary of the chart region
    /// (negative outside).
    pub fn depth(&self, c: &[f64]) -> f64 {
        match &self.space.kind {
            SpaceKind::PoincareDisk
            | SpaceKind::KobayashiBall { .. }
            | SpaceKind::NormedSpace { .. }
            | SpaceKind::TorusTeichmueller => 1.0 - l2(c),
            SpaceKind::Polydisc { .. } => c
                .chunks(2)
                .map(|p| 1.0 - p[0].hypot(p[1]))
                .fold(f64::INFINITY, f64::min),
            SpaceKind::HilbertPolytope(p) => p.boundary_distance(c),
            SpaceKind::FiniteGraph(_) => f64::NAN,
        }
    }

    /// Distance from the boundary point at `c` to the nearest boundary stratum
    /// of lower dimension that does not contain it; infinite on smooth boundaries.
    pub fn feature_size(&self, c: &[f64]) -> f64 {
        match &self.space.kind {
            SpaceKind::HilbertPolytope(p) => p
                .facets
                .iter()
                .map(|f| f.slack(c) / l2(&f.normal))
                .filter(|s| *s > SNAP)
                .fold(f64::INFINITY, f64::min),
            SpaceKind::Polydisc { .. } => {
                let gaps: Vec<f64> = c.chunks(2).map(|p| 1.0 - p[0].hypot(p[1])).collect();
                if gaps.iter().all(|g| *g > SNAP) {
                    return f64::INFINITY;
                }
                gaps.into_iter().filter(|g| *g > SNAP).fold(f64::INFINITY, f64::min)
            }
            _ => f64::INFINITY,
        }
    }

    /// Exit parameter `t > 0` of the ray `a + t v` from the interior point `a`.
    pub fn exit_time(&self, a: &[f64], v: &[f64]) -> f64 {
        match &self.space.kind {
            SpaceKind::PoincareDisk
            | SpaceKind::KobayashiBall { .. }
            | SpaceKind::NormedSpace { .. }
            | SpaceKind::TorusTeichmueller => sphere_exit(a, v),
            SpaceKind::Polydisc { .. } => a
                .chunks(2)
                .zip(v.chunks(2))
                .map(|(x, y)| sphere_exit(x, y))
                .fold(f64::INFINITY, f64::min),
            SpaceKind::HilbertPolytope(p) => {
                let mut t = f64::INFINITY;
                for f in &p.facets {
                    let w: f64 = f.normal.iter().zip(v).map(|(n, x)| n * x).sum();
                    if w > 0.0 {
                        t = t.min(f.slack(a) / w);
                    }
                }
                t
            }
            SpaceKind::FiniteGraph(_) => f64::NAN,
        }
    }

    /// Ideal point at chart coordinates `c` lying on the chart boundary
    /// (up to a small tolerance, after snapping).
    pub fn chart_to_boundary(&self, c: &[f64]) -> Result<BoundaryPoint> {
        if c.len() != self.dim() {
            return Err(Error::Invalid("chart dimension mismatch".into()));
        }
        if self.depth(c).abs() > 1e-6 {
            return Err(Error::Domain("chart point is not on the boundary".into()));
        }
        let b = match &self.space.kind {
            SpaceKind::PoincareDisk => {
                let z = C64::new(c[0], c[1]);
                BoundaryPoint::Disk(z / z.norm())
            }
            SpaceKind::KobayashiBall { .. } => {
                let z = unflatten(c);
                let n = norm_sqr(&z).sqrt();
                BoundaryPoint::Ball(z.into_iter().map(|v| v / n).collect())
            }
            SpaceKind::Polydisc { .. } => {
                let mut coords = unflatten(c);
                let mut unimodular = Vec::new();
                for (i, z) in coords.iter_mut().enumerate() {
                    if (z.norm() - 1.0).abs() <= 1e-6 {
                        *z /= z.norm();
                        unimodular.push(i);
                    }
                }
                BoundaryPoint::Polydisc { coords, unimodular }
            }
            SpaceKind::HilbertPolytope(p) => {
                let mut x = c.to_vec();
                if p.barycentric {
                    for v in x.iter_mut() {
                        if v.abs() <= 1e-6 {
                            *v = 0.0;
                        }
                    }
                    let s: f64 = x.iter().sum();
                    x.iter_mut().for_each(|v| *v /= s);
                }
                let face = p.face_of(&x, 1e-6);
                BoundaryPoint::Polytope { coords: x, face }
            }
            SpaceKind::NormedSpace { .. } => {
                let n = l2(c);
                BoundaryPoint::Direction(c.iter().map(|v| v / n).collect())
            }
            SpaceKind::TorusTeichmueller => {
                let w = C64::new(c[0], c[1]);
                let w = w / w.norm();
                if (w - 1.0).norm() < 1e-12 {
                    BoundaryPoint::HalfPlane(None)
                } else {
                    BoundaryPoint::HalfPlane(Some(inv_cayley(w).re))
                }
            }
            SpaceKind::FiniteGraph(_) => return self.graph_err(),
        };
        Ok(b)
    }

    /// Radial projection of `c` from the basepoint onto the chart boundary.
    pub fn project_to_boundary(&self, c: &[f64]) -> Result<BoundaryPoint> {
        let b = self.to_chart(&self.space.basepoint)?;
        let v: Vec<f64> = c.iter().zip(&b).map(|(x, y)| x - y).collect();
        if l2(&v) == 0.0 {
            return Err(Error::Domain("cannot project the basepoint".into()));
        }
        let t = self.exit_time(&b, &v);
        let e: Vec<f64> = b.iter().zip(&v).map(|(x, y)| x + t * y).collect();
        self.chart_to_boundary(&e)
    }

    /// Orthonormal basis of directions along which the chart region extends.
    pub fn tangent_basis(&self) -> Vec<ChartVec> {
        let m = self.dim();
        if let SpaceKind::HilbertPolytope(p) = &self.space.kind {
            if p.barycentric {
                // Gram-Schmidt on e_i - e_m inside the zero-sum hyperplane
                let mut basis: Vec<ChartVec> = Vec::new();
                for i in 0..m - 1 {
                    let mut v = vec![0.0; m];
                    v[i] = 1.0;
                    v[m - 1] = -1.0;
                    for b in &basis {
                        let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
                    }
                    let n = l2(&v);
                    basis.push(v.into_iter().map(|x| x / n).collect());
                }
                return basis;
            }
        }
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    fn random_unit(&self, rng: &mut impl Rng, m: usize) -> ChartVec {
        loop {
            let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
            let n = l2(&v);
            if n > 1e-12 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }

    fn dirichlet(rng: &mut impl Rng, k: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    /// Random interior point whose chart position lies within the fraction
    /// `reach` of the way from the basepoint-free centre to the boundary.
    pub fn sample_interior(&self, rng: &mut impl Rng, reach: f64) -> Point {
        match &self.space.kind {
            SpaceKind::FiniteGraph(g) => Point::Vertex(rng.gen_range(0..g.vertices)),
            SpaceKind::Polydisc { dim } => {
                let c: Vec<f64> = (0..*dim)
                    .flat_map(|_| {
                        let u = self.random_unit(rng, 2);
                        let r = reach * rng.gen::<f64>().sqrt();
                        [r * u[0], r * u[1]]
                    })
                    .collect();
                self.from_chart(&c).expect("sample inside polydisc")
            }
            SpaceKind::HilbertPolytope(p) => {
                let w = Self::dirichlet(rng, p.vertices.len());
                let cen = p.centroid();
                let mut x = vec![0.0; p.dim()];
                for (wi, v) in w.iter().zip(&p.vertices) {
                    x.iter_mut().zip(v).for_each(|(a, b)| *a += wi * b);
                }
                let x: Vec<f64> = x.iter().zip(&cen).map(|(a, c)| c + reach * (a - c)).collect();
                self.from_chart(&x).unwrap_or(Point::Polytope(cen))
            }
            _ => {
                let m = self.dim();
                let u = self.random_unit(rng, m);
                let r = reach * rng.gen::<f64>().powf(1.0 / m as f64);
                let c: Vec<f64> = u.into_iter().map(|x| r * x).collect();
                self.from_chart(&c).expect("sample inside unit ball chart")
            }
        }
    }

    pub fn sample_boundary(&self, rng: &mut impl Rng) -> Result<BoundaryPoint> {
        let c = match &self.space.kind {
            SpaceKind::FiniteGraph(_) => return self.graph_err(),
            SpaceKind::Polydisc { dim } => {
                let k = rng.gen_range(1..=*dim);
                let mut idx: Vec<usize> = (0..*dim).collect();
                for i in 0..*dim {
                    idx.swap(i, rng.gen_range(i..*dim));
                }
                let mut c = vec![0.0; 2 * dim];
                for (rank, &i) in idx.iter().enumerate() {
                    let u = self.random_unit(rng, 2);
                    let r = if rank < k { 1.0 } else { 0.9 * rng.gen::<f64>().sqrt() };
                    c[2 * i] = r * u[0];
                    c[2 * i + 1] = r * u[1];
                }
                c
            }
            SpaceKind::HilbertPolytope(p) => {
                let f = &p.facets[rng.gen_range(0..p.facets.len())];
                let on: Vec<&Vec<f64>> =
                    p.vertices.iter().filter(|v| f.slack(v).abs() < SNAP).collect();
                let w = Self::dirichlet(rng, on.len());
                let mut x = vec![0.0; p.dim()];
                for (wi, v) in w.iter().zip(on) {
                    x.iter_mut().zip(v).for_each(|(a, b)| *a += wi * b);
                }
                x
            }
            _ => self.random_unit(rng, self.dim()),
        };
        self.chart_to_boundary(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::tests::catalog;
    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in catalog().into_iter().filter(|s| Chart::new(s).supported()) {
            let ch = Chart::new(&s);
            for _ in 0..200 {
                let p = ch.sample_interior(&mut rng, 0.9);
                let c = ch.to_chart(&p).unwrap();
                let q = ch.from_chart(&c).unwrap();
                assert!(s.d(&p, &q) < 1e-9, "{}", s.name());
                assert!(ch.depth(&c) > 0.0);
            }
        }
    }

    #[test]
    fn boundary_samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for s in catalog().into_iter().filter(|s| Chart::new(s).supported()) {
            let ch = Chart::new(&s);
            for _ in 0..100 {
                let b = ch.sample_boundary(&mut rng).unwrap();
                s.check_boundary(&b).unwrap();
                let c = ch.boundary_to_chart(&b).unwrap();
                assert!(ch.depth(&c).abs() < 1e-6, "{}", s.name());
            }
        }
    }

    #[test]
    fn half_plane_infinity_maps_to_one() {
        let s = ModelSpace::half_plane();
        let ch = Chart::new(&s);
        assert_eq!(ch.boundary_to_chart(&BoundaryPoint::HalfPlane(None)).unwrap(), vec![1.0, 0.0]);
        let c = ch.to_chart(&Point::HalfPlane(C64::new(0.0, 1.0))).unwrap();
        assert!(l2(&c) < 1e-15);
    }

    #[test]
    fn simplex_tangent_basis_is_orthonormal_and_zero_sum() {
        let s = ModelSpace::simplex(4).unwrap();
        let b = Chart::new(&s).tangent_basis();
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(u.iter().sum::<f64>().abs() < 1e-12);
            for (j, v) in b.iter().enumerate() {
                let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_projection_lands_on_boundary() {
        let s = ModelSpace::polydisc(2).unwrap();
        let ch = Chart::new(&s);
        let b = ch.project_to_boundary(&[0.5, 0.0, 0.25, 0.0]).unwrap();
        match b {
            BoundaryPoint::Polydisc { coords, unimodular } => {
                assert_eq!(unimodular, vec![0]);
                assert!((coords[1].re - 0.5).abs() < 1e-12);
            }
            _ => panic!(),
        }
    }
}
