use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::spaces::{BoundaryPoint, Face, ModelSpace, Norm, SpaceKind};
use crate::{Error, Result};

/// Closed-form star of a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StarDescription {
    Singleton(BoundaryPoint),
    /// Directions at Tits angle at most `π/2` from the centre.
    HalfSphere(Vec<f64>),
    /// Union of the closed facets containing the point.
    PolytopeFaceUnion(Vec<Face>),
    Sampled(Vec<(BoundaryPoint, Outcome)>),
}

impl StarDescription {
    pub fn contains(&self, space: &ModelSpace, eta: &BoundaryPoint) -> Result<bool> {
        space.check_boundary(eta)?;
        Ok(match (self, eta) {
            (StarDescription::Singleton(xi), _) => same_point(xi, eta),
            (StarDescription::HalfSphere(u), BoundaryPoint::Direction(v)) => tits_angle(u, v) <= std::f64::consts::FRAC_PI_2 + 1e-9,
            (StarDescription::PolytopeFaceUnion(faces), BoundaryPoint::Polytope { face, .. }) => {
                faces.iter().any(|f| f.0.iter().all(|i| face.0.contains(i)))
            }
            (StarDescription::Sampled(list), _) => {
                list.iter().any(|(p, o)| *o == Outcome::Member && same_point(p, eta))
            }
            _ => return Err(Error::Mismatch),
        })
    }
}

fn same_point(a: &BoundaryPoint, b: &BoundaryPoint) -> bool {
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-9);
    match (a, b) {
        (BoundaryPoint::Disk(z), BoundaryPoint::Disk(w)) => (z - w).norm() < 1e-9,
        (BoundaryPoint::Ball(z), BoundaryPoint::Ball(w)) => z.iter().zip(w).all(|(p, q)| (p - q).norm() < 1e-9),
        (BoundaryPoint::Polydisc { coords: z, .. }, BoundaryPoint::Polydisc { coords: w, .. }) => {
            z.iter().zip(w).all(|(p, q)| (p - q).norm() < 1e-9)
        }
        (BoundaryPoint::Polytope { coords: x, .. }, BoundaryPoint::Polytope { coords: y, .. }) => close(x, y),
        (BoundaryPoint::Direction(x), BoundaryPoint::Direction(y)) => close(x, y),
        (BoundaryPoint::HalfPlane(None), BoundaryPoint::HalfPlane(None)) => true,
        (BoundaryPoint::HalfPlane(Some(s)), BoundaryPoint::HalfPlane(Some(t))) => (s - t).abs() < 1e-9,
        _ => false,
    }
}

/// Angle between two directions of the visual boundary of Euclidean space.
pub fn tits_angle(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let c: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
    c.clamp(-1.0, 1.0).acos()
}

/// Exact star on the spaces that carry an oracle.
pub fn star_exact(space: &ModelSpace, xi: &BoundaryPoint) -> Result<StarDescription> {
    space.check_boundary(xi)?;
    match (&space.kind, xi) {
        (SpaceKind::PoincareDisk | SpaceKind::KobayashiBall { .. } | SpaceKind::TorusTeichmueller, _) => {
            Ok(StarDescription::Singleton(xi.clone()))
        }
        (SpaceKind::NormedSpace { norm: Norm::L2, .. }, BoundaryPoint::Direction(u)) => {
            Ok(StarDescription::HalfSphere(u.clone()))
        }
        (SpaceKind::HilbertPolytope(_), BoundaryPoint::Polytope { face, .. }) => Ok(
            StarDescription::PolytopeFaceUnion(face.0.iter().map(|&i| Face(vec![i])).collect()),
        ),
        _ => Err(Error::unsupported("star_exact", space.name())),
    }
}

/// Oracle answer to `η ∈ S(ξ)`, or `None` without an oracle.
pub fn oracle_member(space: &ModelSpace, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Option<bool> {
    star_exact(space, xi).ok()?.contains(space, eta).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Polytope;
    use crate::C64;

    fn square() -> ModelSpace {
        ModelSpace::polytope(
            Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn disk_stars_are_points() {
        let s = ModelSpace::disk();
        let xi = BoundaryPoint::Disk(C64::new(1.0, 0.0));
        assert_eq!(star_exact(&s, &xi).unwrap(), StarDescription::Singleton(xi.clone()));
        assert_eq!(oracle_member(&s, &xi, &BoundaryPoint::Disk(C64::new(0.0, 1.0))), Some(false));
    }

    #[test]
    fn euclidean_half_sphere() {
        let s = ModelSpace::normed(3, Norm::L2).unwrap();
        let e1 = BoundaryPoint::Direction(vec![1.0, 0.0, 0.0]);
        assert_eq!(star_exact(&s, &e1).unwrap(), StarDescription::HalfSphere(vec![1.0, 0.0, 0.0]));
        assert_eq!(oracle_member(&s, &e1, &BoundaryPoint::Direction(vec![0.0, 1.0, 0.0])), Some(true));
        let v = 0.6f64;
        let back = BoundaryPoint::Direction(vec![-v, 0.8, 0.0]);
        assert_eq!(oracle_member(&s, &e1, &back), Some(false));
    }

    #[test]
    fn square_vertex_star_is_two_edges() {
        let s = square();
        let v = s.boundary_from_coords(&[0.0, 0.0]).unwrap();
        let StarDescription::PolytopeFaceUnion(f) = star_exact(&s, &v).unwrap() else { panic!() };
        assert_eq!(f.len(), 2);
        let on_bottom = s.boundary_from_coords(&[0.6, 0.0]).unwrap();
        let on_left = s.boundary_from_coords(&[0.0, 0.3]).unwrap();
        let on_top = s.boundary_from_coords(&[0.6, 1.0]).unwrap();
        let far_vertex = s.boundary_from_coords(&[1.0, 1.0]).unwrap();
        assert_eq!(oracle_member(&s, &v, &on_bottom), Some(true));
        assert_eq!(oracle_member(&s, &v, &on_left), Some(true));
        assert_eq!(oracle_member(&s, &v, &on_top), Some(false));
        assert_eq!(oracle_member(&s, &v, &far_vertex), Some(false));
        assert_eq!(oracle_member(&s, &on_bottom, &v), Some(true));
    }

    #[test]
    fn polydisc_has_no_oracle() {
        let s = ModelSpace::polydisc(2).unwrap();
        let xi = s.boundary_from_coords(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(star_exact(&s, &xi).is_err());
    }
}
