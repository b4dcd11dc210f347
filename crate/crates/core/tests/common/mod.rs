#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starbound::spaces::{Chart, Graph, ModelSpace, Norm, Point, Polytope};
use starbound::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn square() -> ModelSpace {
    ModelSpace::polytope(
        Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap(),
    )
    .unwrap()
}

pub fn catalog() -> Vec<ModelSpace> {
    let graph = Graph::new(6, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 1.5), (4, 5, 1.0), (5, 0, 1.0), (1, 4, 0.5)]).unwrap();
    vec![
        ModelSpace::disk(),
        ModelSpace::ball(2).unwrap(),
        ModelSpace::polydisc(2).unwrap(),
        ModelSpace::simplex(3).unwrap(),
        square(),
        ModelSpace::normed(2, Norm::L1).unwrap(),
        ModelSpace::normed(3, Norm::L2).unwrap(),
        ModelSpace::half_plane(),
        ModelSpace::graph(graph).unwrap(),
    ]
}

pub fn sample(space: &ModelSpace, rng: &mut ChaCha8Rng, reach: f64) -> Point {
    Chart::new(space).sample_interior(rng, reach)
}

pub fn hp(re: f64, im: f64) -> Point {
    Point::HalfPlane(C64::new(re, im))
}

pub fn dist(s: &ModelSpace, x: &Point, y: &Point) -> f64 {
    s.distance(x, y).unwrap()
}
