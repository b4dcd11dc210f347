use super::*;
use crate::spaces::{Norm, Polytope};
use crate::C64;

fn square() -> ModelSpace {
    ModelSpace::polytope(
        Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap(),
    )
    .unwrap()
}

fn disk_pt(theta: f64) -> BoundaryPoint {
    BoundaryPoint::Disk(C64::from_polar(1.0, theta))
}

#[test]
fn halfspace_examples() {
    let s = ModelSpace::disk();
    let w = [Point::Disk(C64::new(0.9, 0.0))];
    assert!(halfspace_membership(&s, &w, 0.0, &w[0]).unwrap());
    assert!(!halfspace_membership(&s, &w, 0.0, &Point::Disk(C64::new(-0.9, 0.0))).unwrap());
    let c = s.d(&s.basepoint, &w[0]);
    assert!(halfspace_membership(&s, &w, c, &Point::Disk(C64::new(-0.99, 0.1))).unwrap());
}

#[test]
fn disk_opposite_points_are_separated() {
    let s = ModelSpace::disk();
    let v = star_test(&s, &disk_pt(0.0), &disk_pt(std::f64::consts::PI), &StarBudget::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NonMember, "{v:?}");
    assert!(v.evals <= 10_000);
}

#[test]
fn euclidean_right_angle_is_member() {
    let s = ModelSpace::normed(2, Norm::L2).unwrap();
    let v = star_test(
        &s,
        &BoundaryPoint::Direction(vec![1.0, 0.0]),
        &BoundaryPoint::Direction(vec![0.0, 1.0]),
        &StarBudget::default(),
    )
    .unwrap();
    assert_eq!(v.outcome, Outcome::Member, "{v:?}");
    if let Witness::Member { c, xs, ys } = &v.witness {
        for (x, y) in xs.iter().zip(ys) {
            assert!(s.d(y, x) <= s.d(y, &s.basepoint) + c + 1e-9);
        }
    }
}

#[test]
fn square_edge_point_sees_its_vertex() {
    let s = square();
    let xi = s.boundary_from_coords(&[0.5, 0.0]).unwrap();
    let eta = s.boundary_from_coords(&[0.0, 0.0]).unwrap();
    let v = star_test(&s, &xi, &eta, &StarBudget::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Member, "{v:?}");
    let far = s.boundary_from_coords(&[0.0, 1.0]).unwrap();
    let v = star_test(&s, &xi, &far, &StarBudget::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NonMember, "{v:?}");
}

#[test]
fn equal_points_are_members() {
    for s in [ModelSpace::disk(), square(), ModelSpace::normed(3, Norm::L1).unwrap()] {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let xi = Chart::new(&s).sample_boundary(&mut rng).unwrap();
        assert!(star_test(&s, &xi, &xi, &StarBudget::default()).unwrap().is_member());
    }
}

#[test]
fn tiny_budget_is_inconclusive() {
    let s = ModelSpace::disk();
    let v = star_test(&s, &disk_pt(0.0), &disk_pt(2.0), &StarBudget::with_evals(1)).unwrap();
    assert_eq!(v.outcome, Outcome::Inconclusive);
}

#[test]
fn graphs_have_no_stars() {
    let g = crate::spaces::Graph::new(2, vec![(0, 1, 1.0)]).unwrap();
    let s = ModelSpace::graph(g).unwrap();
    assert!(star_test(&s, &disk_pt(0.0), &disk_pt(1.0), &StarBudget::default()).is_err());
}
