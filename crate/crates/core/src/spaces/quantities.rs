//! Closed-form auxiliary quantities.

use super::chart::Chart;
use super::{hermitian, norm_sqr, ModelSpace, Point, SpaceKind};
use crate::{Error, Result, C64};

/// Infinitesimal Kobayashi metric `K(z; v)` of the unit ball.
pub fn kobayashi_infinitesimal_ball(z: &[C64], v: &[C64]) -> Result<f64> {
    let zz = norm_sqr(z);
    if zz >= 1.0 || z.len() != v.len() {
        return Err(Error::Domain("z must lie in the ball with v of matching length".into()));
    }
    let vv = norm_sqr(v);
    if vv == 0.0 {
        return Err(Error::Invalid("tangent vector must be nonzero".into()));
    }
    let zv = hermitian(z, v).norm_sqr();
    Ok(((vv * (1.0 - zz) + zv) / (1.0 - zz).powi(2)).sqrt())
}

/// Euclidean distance from an interior point to the topological boundary.
pub fn euclidean_boundary_distance(space: &ModelSpace, z: &Point) -> Result<f64> {
    match space.kind {
        SpaceKind::PoincareDisk
        | SpaceKind::KobayashiBall { .. }
        | SpaceKind::Polydisc { .. }
        | SpaceKind::HilbertPolytope(_) => {
            let ch = Chart::new(space);
            Ok(ch.depth(&ch.to_chart(z)?))
        }
        _ => Err(Error::unsupported("euclidean_boundary_distance", space.name())),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn half_plane_coord(x: &Point) -> Result<C64> {
    match x {
        Point::HalfPlane(z) if z.im > 0.0 && z.is_finite() => Ok(*z),
        Point::HalfPlane(_) => Err(Error::Domain("Im x must be positive".into())),
        _ => Err(Error::Mismatch),
    }
}

/// Extremal length `|p + q x|² / Im x` of the `(p, q)` class on the flat torus `C / (Z + xZ)`.
pub fn extremal_length_torus(x: &Point, p: i64, q: i64) -> Result<f64> {
    let z = half_plane_coord(x)?;
    if gcd(p, q) != 1 {
        return Err(Error::Invalid(format!("({p}, {q}) is not a primitive class")));
    }
    Ok((C64::new(p as f64, 0.0) + q as f64 * z).norm_sqr() / z.im)
}

/// Primitive classes `(p, q)` with `max(|p|, |q|) ≤ bound`, one per sign pair.
pub fn primitive_classes(bound: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(1, 0)];
    for q in 1..=bound {
        for p in -bound..=bound {
            if gcd(p, q) == 1 {
                out.push((p, q));
            }
        }
    }
    out
}

/// `½ log` of the largest extremal-length ratio over primitive classes up to `bound`.
pub fn kerckhoff_distance(x: &Point, y: &Point, bound: i64) -> Result<f64> {
    half_plane_coord(x)?;
    half_plane_coord(y)?;
    if bound < 1 {
        return Err(Error::Invalid("pq_bound must be at least 1".into()));
    }
    if x == y {
        return Ok(0.0);
    }
    let mut best = 1.0f64;
    for (p, q) in primitive_classes(bound) {
        best = best.max(extremal_length_torus(x, p, q)? / extremal_length_torus(y, p, q)?);
    }
    Ok(0.5 * best.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Polytope;

    fn hp(re: f64, im: f64) -> Point {
        Point::HalfPlane(C64::new(re, im))
    }

    #[test]
    fn infinitesimal_metric_examples() {
        let e1 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let zero = [C64::new(0.0, 0.0); 2];
        assert!((kobayashi_infinitesimal_ball(&zero, &e1).unwrap() - 1.0).abs() < 1e-15);
        let z = [C64::new(0.9, 0.0), C64::new(0.0, 0.0)];
        let k = kobayashi_infinitesimal_ball(&z, &e1).unwrap();
        assert!((k - 1.0 / 0.19).abs() < 1e-12);
    }

    /// Extremal length of a class as the squared shortest flat geodesic length
    /// divided by the area, computed from the lattice directly.
    fn flat_oracle(x: C64, p: i64, q: i64) -> f64 {
        let (a, b) = (C64::new(1.0, 0.0), x);
        let v = p as f64 * a + q as f64 * b;
        let area = (a.conj() * b).im.abs();
        v.norm_sqr() / area
    }

    #[test]
    fn extremal_length_examples() {
        assert!((extremal_length_torus(&hp(0.0, 1.0), 1, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((extremal_length_torus(&hp(0.0, 2.0), 0, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((extremal_length_torus(&hp(0.0, 1.0), 0, 1).unwrap() - 1.0).abs() < 1e-15);
        let x = C64::new(0.3, 1.7);
        for (p, q) in primitive_classes(5) {
            let v = extremal_length_torus(&Point::HalfPlane(x), p, q).unwrap();
            assert!((v - flat_oracle(x, p, q)).abs() < 1e-12);
        }
        assert!(extremal_length_torus(&hp(0.0, 1.0), 2, 4).is_err());
    }

    #[test]
    fn kerckhoff_examples() {
        let v = kerckhoff_distance(&hp(0.0, 1.0), &hp(0.0, 2.0), 1).unwrap();
        assert!((v - 0.5 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(kerckhoff_distance(&hp(0.3, 0.4), &hp(0.3, 0.4), 7).unwrap(), 0.0);
        let s = ModelSpace::half_plane();
        let (x, y) = (hp(0.0, 1.0), hp(1.0, 1.0));
        let k = kerckhoff_distance(&x, &y, 50).unwrap();
        assert!((k - s.distance(&x, &y).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn boundary_distance_examples() {
        let b = ModelSpace::ball(3).unwrap();
        let z = b.basepoint.clone();
        assert!((euclidean_boundary_distance(&b, &z).unwrap() - 1.0).abs() < 1e-15);
        let d = ModelSpace::disk();
        let v = euclidean_boundary_distance(&d, &Point::Disk(C64::new(0.9, 0.0))).unwrap();
        assert!((v - 0.1).abs() < 1e-12);
        let sq = Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let s = ModelSpace::polytope(sq).unwrap();
        let v = euclidean_boundary_distance(&s, &Point::Polytope(vec![0.5, 0.25])).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        assert!(euclidean_boundary_distance(&ModelSpace::half_plane(), &hp(0.0, 1.0)).is_err());
    }
}
