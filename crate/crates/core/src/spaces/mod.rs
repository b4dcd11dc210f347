//! Model geometries: points, ideal points and distances.
//!
//! Scale conventions are fixed once here. The disk, ball and polydisc use the
//! `arctanh` normalisation of the Kobayashi distance, Hilbert distances are
//! `½ log` of the cross-ratio, and the upper half-plane carries half of the
//! curvature `-1` distance so that it equals the Teichmüller distance of the
//! flat torus. An extra multiplicative `scale` (default 1) is applied on top
//! of every distance.

mod chart;
pub(crate) mod geodesic;
mod graph;
mod polytope;
mod quantities;

pub use chart::{Chart, ChartVec};
pub use geodesic::{almost_geodesic, geodesic, geodesic_ray, AlmostGeodesic};
pub use graph::Graph;
pub use polytope::{Face, Facet, Polytope};
pub use quantities::{
    euclidean_boundary_distance, extremal_length_torus, kerckhoff_distance,
    kobayashi_infinitesimal_ball, primitive_classes,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpaceKind {
    PoincareDisk,
    KobayashiBall { dim: usize },
    Polydisc { dim: usize },
    HilbertPolytope(Polytope),
    NormedSpace { dim: usize, norm: Norm },
    TorusTeichmueller,
    FiniteGraph(Graph),
}

/// Interior point of a model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Disk(C64),
    Ball(Vec<C64>),
    Polydisc(Vec<C64>),
    Polytope(Vec<f64>),
    Normed(Vec<f64>),
    HalfPlane(C64),
    Vertex(usize),
}

/// Ideal point of a model space in its extrinsic compactification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Disk(C64),
    Ball(Vec<C64>),
    /// `unimodular` lists the coordinates of modulus one.
    Polydisc { coords: Vec<C64>, unimodular: Vec<usize> },
    /// `face` is the minimal face carrying the point.
    Polytope { coords: Vec<f64>, face: Face },
    /// Unit direction of the visual boundary.
    Direction(Vec<f64>),
    /// Real boundary point, or `None` for the point at infinity.
    HalfPlane(Option<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kind: SpaceKind,
    pub basepoint: Point,
    /// Multiplier applied to every distance.
    pub scale: f64,
}

pub(crate) fn hermitian(z: &[C64], w: &[C64]) -> C64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn norm_sqr(z: &[C64]) -> f64 {
    z.iter().map(|a| a.norm_sqr()).sum()
}

/// `arctanh u` given `u²` and `1 - u²` computed independently.
fn arctanh_split(u_sq: f64, one_minus_u_sq: f64) -> f64 {
    let u = u_sq.max(0.0).sqrt();
    if u < 0.5 {
        u.atanh()
    } else {
        (1.0 + u).ln() - 0.5 * one_minus_u_sq.ln()
    }
}

/// Kobayashi distance on the unit ball of `C^N` (N = 1 is the disk).
pub(crate) fn ball_distance(z: &[C64], w: &[C64]) -> f64 {
    let inner = hermitian(z, w);
    let denom = (C64::new(1.0, 0.0) - inner).norm_sqr();
    let diff: f64 = z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
    let mut wedge = 0.0;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            wedge += (z[i] * w[j] - z[j] * w[i]).norm_sqr();
        }
    }
    let u_sq = ((diff - wedge) / denom).min(1.0);
    let comp = (1.0 - norm_sqr(z)) * (1.0 - norm_sqr(w)) / denom;
    arctanh_split(u_sq, comp)
}

pub(crate) fn disk_distance(z: C64, w: C64) -> f64 {
    ball_distance(&[z], &[w])
}

pub(crate) fn half_plane_distance(z: C64, w: C64) -> f64 {
    ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

impl ModelSpace {
    fn build(kind: SpaceKind, basepoint: Point) -> Result<Self> {
        let s = ModelSpace {
            kind,
            basepoint: basepoint.clone(),
            scale: 1.0,
        };
        s.check(&basepoint)?;
        Ok(s)
    }

    pub fn disk() -> Self {
        Self::build(SpaceKind::PoincareDisk, Point::Disk(C64::new(0.0, 0.0))).unwrap()
    }

    pub fn ball(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("ball dimension must be positive".into()));
        }
        Self::build(SpaceKind::KobayashiBall { dim }, Point::Ball(vec![C64::new(0.0, 0.0); dim]))
    }

    pub fn polydisc(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("polydisc dimension must be positive".into()));
        }
        Self::build(SpaceKind::Polydisc { dim }, Point::Polydisc(vec![C64::new(0.0, 0.0); dim]))
    }

    /// Hilbert geometry of a polytope, based at its vertex centroid.
    pub fn polytope(p: Polytope) -> Result<Self> {
        let c = p.centroid();
        Self::build(SpaceKind::HilbertPolytope(p), Point::Polytope(c))
    }

    /// Hilbert geometry of the open standard simplex (projectivised positive cone).
    pub fn simplex(n: usize) -> Result<Self> {
        Self::polytope(Polytope::simplex(n)?)
    }

    pub fn normed(dim: usize, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("normed space dimension must be positive".into()));
        }
        Self::build(SpaceKind::NormedSpace { dim, norm }, Point::Normed(vec![0.0; dim]))
    }

    pub fn half_plane() -> Self {
        Self::build(SpaceKind::TorusTeichmueller, Point::HalfPlane(C64::new(0.0, 1.0))).unwrap()
    }

    pub fn graph(g: Graph) -> Result<Self> {
        Self::build(SpaceKind::FiniteGraph(g), Point::Vertex(0))
    }

    pub fn with_basepoint(mut self, p: Point) -> Result<Self> {
        self.check(&p)?;
        self.basepoint = p;
        Ok(self)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Invalid("scale must be positive".into()));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            SpaceKind::PoincareDisk => "poincare_disk",
            SpaceKind::KobayashiBall { .. } => "kobayashi_ball",
            SpaceKind::Polydisc { .. } => "polydisc",
            SpaceKind::HilbertPolytope(p) if p.barycentric => "hilbert_simplex",
            SpaceKind::HilbertPolytope(_) => "hilbert_polytope",
            SpaceKind::NormedSpace { norm: Norm::L1, .. } => "normed_l1",
            SpaceKind::NormedSpace { norm: Norm::L2, .. } => "normed_l2",
            SpaceKind::TorusTeichmueller => "torus_teichmueller",
            SpaceKind::FiniteGraph(_) => "finite_graph",
        }
    }

    pub fn polytope_ref(&self) -> Option<&Polytope> {
        match &self.kind {
            SpaceKind::HilbertPolytope(p) => Some(p),
            _ => None,
        }
    }

    /// Verifies that `p` is an interior point of this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        let ok = match (&self.kind, p) {
            (SpaceKind::PoincareDisk, Point::Disk(z)) => z.norm_sqr() < 1.0 && z.is_finite(),
            (SpaceKind::KobayashiBall { dim }, Point::Ball(z)) => {
                z.len() == *dim && norm_sqr(z) < 1.0 && z.iter().all(|c| c.is_finite())
            }
            (SpaceKind::Polydisc { dim }, Point::Polydisc(z)) => {
                z.len() == *dim && z.iter().all(|c| c.norm_sqr() < 1.0)
            }
            (SpaceKind::HilbertPolytope(poly), Point::Polytope(x)) => poly.contains_interior(x),
            (SpaceKind::NormedSpace { dim, .. }, Point::Normed(x)) => {
                x.len() == *dim && x.iter().all(|v| v.is_finite())
            }
            (SpaceKind::TorusTeichmueller, Point::HalfPlane(z)) => z.im > 0.0 && z.is_finite(),
            (SpaceKind::FiniteGraph(g), Point::Vertex(v)) => *v < g.vertices,
            _ => return Err(Error::Mismatch),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{p:?} is outside {}", self.name())))
        }
    }

    /// Verifies that `b` is an ideal point of this space.
    pub fn check_boundary(&self, b: &BoundaryPoint) -> Result<()> {
        let tol = 1e-9;
        let ok = match (&self.kind, b) {
            (SpaceKind::PoincareDisk, BoundaryPoint::Disk(z)) => (z.norm() - 1.0).abs() < tol,
            (SpaceKind::KobayashiBall { dim }, BoundaryPoint::Ball(z)) => {
                z.len() == *dim && (norm_sqr(z).sqrt() - 1.0).abs() < tol
            }
            (SpaceKind::Polydisc { dim }, BoundaryPoint::Polydisc { coords, unimodular }) => {
                coords.len() == *dim
                    && coords.iter().all(|c| c.norm() <= 1.0 + tol)
                    && !unimodular.is_empty()
                    && (0..*dim).all(|i| unimodular.contains(&i) == ((coords[i].norm() - 1.0).abs() < tol))
            }
            (SpaceKind::HilbertPolytope(p), BoundaryPoint::Polytope { coords, face }) => {
                p.on_boundary(coords, tol) && *face == p.face_of(coords, tol)
            }
            (SpaceKind::NormedSpace { dim, .. }, BoundaryPoint::Direction(u)) => {
                u.len() == *dim && (u.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < tol
            }
            (SpaceKind::TorusTeichmueller, BoundaryPoint::HalfPlane(t)) => t.is_none_or(f64::is_finite),
            (SpaceKind::FiniteGraph(_), _) => {
                return Err(Error::unsupported("boundary", "finite_graph (empty ideal boundary)"))
            }
            _ => return Err(Error::Mismatch),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{b:?} is not an ideal point of {}", self.name())))
        }
    }

    /// Distance under the fixed conventions, times `scale`.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.scale * self.raw_distance(x, y))
    }

    /// Distance without domain checks; callers guarantee membership.
    pub(crate) fn raw_distance(&self, x: &Point, y: &Point) -> f64 {
        if x == y {
            return 0.0;
        }
        match (&self.kind, x, y) {
            (_, Point::Disk(z), Point::Disk(w)) => disk_distance(*z, *w),
            (_, Point::Ball(z), Point::Ball(w)) => ball_distance(z, w),
            (_, Point::Polydisc(z), Point::Polydisc(w)) => z
                .iter()
                .zip(w)
                .map(|(a, b)| disk_distance(*a, *b))
                .fold(0.0, f64::max),
            (SpaceKind::HilbertPolytope(p), Point::Polytope(a), Point::Polytope(b)) => p.hilbert(a, b),
            (SpaceKind::NormedSpace { norm, .. }, Point::Normed(a), Point::Normed(b)) => {
                let it = a.iter().zip(b).map(|(u, v)| u - v);
                match norm {
                    Norm::L1 => it.map(f64::abs).sum(),
                    Norm::L2 => it.map(|t| t * t).sum::<f64>().sqrt(),
                }
            }
            (_, Point::HalfPlane(z), Point::HalfPlane(w)) => half_plane_distance(*z, *w),
            (SpaceKind::FiniteGraph(g), Point::Vertex(a), Point::Vertex(b)) => g.distance(*a, *b),
            _ => f64::NAN,
        }
    }

    /// Scaled distance without domain checks.
    pub(crate) fn d(&self, x: &Point, y: &Point) -> f64 {
        self.scale * self.raw_distance(x, y)
    }

    pub fn basepoint_distance(&self, x: &Point) -> Result<f64> {
        self.distance(&self.basepoint, x)
    }

    /// Boundary point constructors that fill in derived fields.
    pub fn boundary_from_coords(&self, coords: &[f64]) -> Result<BoundaryPoint> {
        let b = match &self.kind {
            SpaceKind::PoincareDisk => BoundaryPoint::Disk(pairs(coords, 1)?[0]),
            SpaceKind::KobayashiBall { dim } => BoundaryPoint::Ball(pairs(coords, *dim)?),
            SpaceKind::Polydisc { dim } => {
                let c = pairs(coords, *dim)?;
                let unimodular = (0..*dim).filter(|&i| (c[i].norm() - 1.0).abs() < 1e-9).collect();
                BoundaryPoint::Polydisc { coords: c, unimodular }
            }
            SpaceKind::HilbertPolytope(p) => BoundaryPoint::Polytope {
                coords: coords.to_vec(),
                face: p.face_of(coords, 1e-9),
            },
            SpaceKind::NormedSpace { .. } => BoundaryPoint::Direction(coords.to_vec()),
            SpaceKind::TorusTeichmueller => {
                BoundaryPoint::HalfPlane(coords.first().copied().filter(|t| t.is_finite()))
            }
            SpaceKind::FiniteGraph(_) => {
                return Err(Error::unsupported("boundary", "finite_graph (empty ideal boundary)"))
            }
        };
        self.check_boundary(&b)?;
        Ok(b)
    }
}

fn pairs(coords: &[f64], dim: usize) -> Result<Vec<C64>> {
    if coords.len() != 2 * dim {
        return Err(Error::Invalid(format!("expected {} real coordinates", 2 * dim)));
    }
    Ok(coords.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// arctanh by its power series, independent of the library routine.
    fn arctanh_series(x: f64) -> f64 {
        (0..2000).map(|k| x.powi(2 * k + 1) / (2 * k + 1) as f64).sum()
    }

    #[test]
    fn disk_distance_matches_series() {
        let d = ModelSpace::disk();
        let v = d
            .distance(&Point::Disk(C64::new(0.0, 0.0)), &Point::Disk(C64::new(0.5, 0.0)))
            .unwrap();
        assert!((v - arctanh_series(0.5)).abs() < 1e-12);
        assert!((v - 0.549_306_144_334_054_8).abs() < 1e-12);
    }

    #[test]
    fn identical_points_have_zero_distance() {
        for s in catalog() {
            let x = s.basepoint.clone();
            assert_eq!(s.distance(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn hilbert_segment_embedded_as_simplex() {
        let s = ModelSpace::simplex(2).unwrap();
        let v = s
            .distance(&Point::Polytope(vec![0.75, 0.25]), &Point::Polytope(vec![0.25, 0.75]))
            .unwrap();
        let oracle = ((0.75f64 * 0.75) / (0.25 * 0.25)).ln() / 2.0;
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 1.098_612_288_668_11).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_and_mismatch_are_errors() {
        let d = ModelSpace::disk();
        assert!(matches!(d.check(&Point::Disk(C64::new(1.0, 0.0))), Err(Error::Domain(_))));
        assert!(matches!(
            d.distance(&Point::Disk(C64::new(0.0, 0.0)), &Point::HalfPlane(C64::new(0.0, 1.0))),
            Err(Error::Mismatch)
        ));
        let h = ModelSpace::half_plane();
        assert!(h.check(&Point::HalfPlane(C64::new(0.0, -1.0))).is_err());
    }

    #[test]
    fn half_plane_is_half_the_hyperbolic_distance() {
        let h = ModelSpace::half_plane();
        let v = h
            .distance(&Point::HalfPlane(C64::new(0.0, 1.0)), &Point::HalfPlane(C64::new(0.0, 2.0)))
            .unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-14);
    }

    pub(crate) fn catalog() -> Vec<ModelSpace> {
        let square = Polytope::from_vertices(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        vec![
            ModelSpace::disk(),
            ModelSpace::ball(2).unwrap(),
            ModelSpace::polydisc(2).unwrap(),
            ModelSpace::polytope(square).unwrap(),
            ModelSpace::simplex(3).unwrap(),
            ModelSpace::normed(3, Norm::L1).unwrap(),
            ModelSpace::normed(2, Norm::L2).unwrap(),
            ModelSpace::half_plane(),
            ModelSpace::graph(
                Graph::new(5, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.0), (4, 0, 3.0), (1, 3, 1.5)])
                    .unwrap(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in catalog() {
            let chart = Chart::new(&s);
            for _ in 0..10_000 {
                let (x, y, z) = (
                    chart.sample_interior(&mut rng, 0.97),
                    chart.sample_interior(&mut rng, 0.97),
                    chart.sample_interior(&mut rng, 0.97),
                );
                let (xy, yz, xz) = (s.d(&x, &y), s.d(&y, &z), s.d(&x, &z));
                assert!(xy >= 0.0 && (s.d(&y, &x) - xy).abs() < 1e-9, "{} symmetry", s.name());
                assert!(xz <= xy + yz + 1e-9, "{}: {xz} > {xy} + {yz}", s.name());
            }
        }
        let _ = rng.gen::<f64>();
    }

    #[test]
    fn polydisc_dominates_coordinate_distances() {
        let s = ModelSpace::polydisc(3).unwrap();
        let chart = Chart::new(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let (x, y) = (chart.sample_interior(&mut rng, 0.99), chart.sample_interior(&mut rng, 0.99));
            let (Point::Polydisc(a), Point::Polydisc(b)) = (&x, &y) else { unreachable!() };
            let total = s.d(&x, &y);
            for i in 0..3 {
                assert!(total + 1e-12 >= disk_distance(a[i], b[i]));
            }
        }
    }

    #[test]
    fn ball_reduces_to_disk_in_one_dimension() {
        let b = ModelSpace::ball(1).unwrap();
        let z = C64::new(0.3, -0.4);
        let w = C64::new(-0.1, 0.7);
        let v = b.distance(&Point::Ball(vec![z]), &Point::Ball(vec![w])).unwrap();
        let direct = ((z - w) / (C64::new(1.0, 0.0) - z.conj() * w)).norm().atanh();
        assert!((v - direct).abs() < 1e-13);
    }
}
