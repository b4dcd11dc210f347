//! Nonexpansive self-maps of the model spaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mobius::{self, Frame, Mat2, MobiusClass};
use crate::spaces::geodesic::ball_involution;
use crate::spaces::{Chart, ModelSpace, Norm, Point, SpaceKind};
use crate::{Error, Result, C64};

const VALIDATION_PAIRS: usize = 1000;
const VALIDATION_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    /// `z ↦ (az + b)/(cz + d)` mapping the disk into itself.
    MobiusDisk { matrix: Mat2 },
    /// Real matrix with positive determinant acting on the upper half-plane.
    MobiusHalfPlane { matrix: [[f64; 2]; 2] },
    /// `z ↦ U φ_a(z)` with `φ_a` the involution exchanging `a` and 0.
    BallAutomorphism { unitary: Vec<Vec<C64>>, point: Vec<C64> },
    /// One disk Möbius self-map per coordinate.
    PolydiscProduct { factors: Vec<Mat2> },
    /// `x ↦ Ax / |Ax|₁` for a nonnegative matrix on the standard simplex.
    MatrixOnSimplex { matrix: Vec<Vec<f64>> },
    EuclideanAffine { linear: Vec<Vec<f64>>, translation: Vec<f64> },
    /// Vertex `v` goes to `table[v]`.
    GraphMap { table: Vec<usize> },
    /// Applied right to left: the last map acts first.
    Composite { maps: Vec<MapSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonexpansiveMap {
    spec: MapSpec,
    space: ModelSpace,
}

fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

fn square(m: &[Vec<f64>], n: usize) -> bool {
    m.len() == n && m.iter().all(|r| r.len() == n && r.iter().all(|v| v.is_finite()))
}

/// Largest singular value by power iteration on `LᵀL`.
fn spectral_norm(l: &[Vec<f64>]) -> f64 {
    let n = l.len();
    let lt = transpose(l);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = mat_vec(&lt, &mat_vec(l, &v));
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        sigma = norm.sqrt() / v.iter().map(|x| x * x).sum::<f64>().sqrt().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    let lv = mat_vec(l, &v);
    sigma.max(lv.iter().map(|x| x * x).sum::<f64>().sqrt())
}

fn operator_norm(l: &[Vec<f64>], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => (0..l.len()).map(|j| l.iter().map(|r| r[j].abs()).sum::<f64>()).fold(0.0, f64::max),
        Norm::L2 => spectral_norm(l),
    }
}

fn is_orthogonal(l: &[Vec<f64>]) -> bool {
    let n = l.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let d: f64 = (0..n).map(|k| l[k][i] * l[k][j]).sum();
            (d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12
        })
    })
}

/// Component of `t` orthogonal to the range of `L − I`.
fn fixed_component(l: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| l[i][j] - if i == j { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let p: f64 = col.iter().zip(b).map(|(x, y)| x * y).sum();
            col.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(col.iter().map(|x| x / norm).collect());
        }
    }
    let mut r = t.to_vec();
    for b in &basis {
        let p: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
        r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
    r
}

fn disk_coord(p: &Point) -> Option<C64> {
    match p {
        Point::Disk(z) => Some(*z),
        Point::HalfPlane(w) => Some(mobius::act(&mobius::cayley(), *w)),
        _ => None,
    }
}

impl NonexpansiveMap {
    /// Validates compatibility, domain preservation and nonexpansiveness on sampled pairs.
    pub fn new(space: &ModelSpace, spec: MapSpec) -> Result<Self> {
        Self::check_shape(space, &spec)?;
        let map = NonexpansiveMap { spec, space: space.clone() };
        map.validate_samples()?;
        Ok(map)
    }

    pub(crate) fn trusted(space: &ModelSpace, spec: MapSpec) -> Self {
        NonexpansiveMap { spec, space: space.clone() }
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    fn check_shape(space: &ModelSpace, spec: &MapSpec) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(msg.to_string()));
        match (spec, &space.kind) {
            (MapSpec::Identity, _) => Ok(()),
            (MapSpec::MobiusDisk { matrix }, SpaceKind::PoincareDisk) => {
                if mobius::det(matrix).norm() < 1e-300 || matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("singular Möbius matrix");
                }
                Ok(())
            }
            (MapSpec::MobiusHalfPlane { matrix }, SpaceKind::TorusTeichmueller) => {
                let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
                if !(det > 0.0) || matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("matrix does not preserve the half-plane".into()));
                }
                Ok(())
            }
            (MapSpec::BallAutomorphism { unitary, point }, SpaceKind::KobayashiBall { dim }) => {
                let n = *dim;
                if point.len() != n || unitary.len() != n || unitary.iter().any(|r| r.len() != n) {
                    return bad("ball automorphism has the wrong dimension");
                }
                if crate::spaces::norm_sqr(point) >= 1.0 {
                    return Err(Error::Domain("automorphism centre lies outside the ball".into()));
                }
                for i in 0..n {
                    for j in 0..n {
                        let g: C64 = (0..n).map(|k| unitary[k][i].conj() * unitary[k][j]).sum();
                        if (g - C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm() > 1e-9 {
                            return bad("matrix is not unitary");
                        }
                    }
                }
                Ok(())
            }
            (MapSpec::PolydiscProduct { factors }, SpaceKind::Polydisc { dim }) => {
                if factors.len() != *dim {
                    return bad("one factor per polydisc coordinate is required");
                }
                Ok(())
            }
            (MapSpec::MatrixOnSimplex { matrix }, SpaceKind::HilbertPolytope(p)) => {
                if !p.barycentric {
                    return Err(Error::unsupported("matrix_on_simplex", space.name()));
                }
                if !square(matrix, p.vertices.len()) || matrix.iter().flatten().any(|v| *v < 0.0) {
                    return bad("matrix must be square, nonnegative and match the simplex");
                }
                if matrix.iter().any(|r| r.iter().all(|v| *v == 0.0)) {
                    return Err(Error::Domain("a zero row sends the open simplex to its boundary".into()));
                }
                Ok(())
            }
            (MapSpec::EuclideanAffine { linear, translation }, SpaceKind::NormedSpace { dim, norm }) => {
                if !square(linear, *dim) || translation.len() != *dim {
                    return bad("affine map has the wrong dimension");
                }
                if operator_norm(linear, *norm) > 1.0 + 1e-9 {
                    return Err(Error::Validation("linear part expands the norm".into()));
                }
                Ok(())
            }
            (MapSpec::GraphMap { table }, SpaceKind::FiniteGraph(g)) => {
                if table.len() != g.vertices || table.iter().any(|&v| v >= g.vertices) {
                    return bad("graph map table must send every vertex to a vertex");
                }
                for a in 0..g.vertices {
                    for b in 0..g.vertices {
                        if g.distance(table[a], table[b]) > g.distance(a, b) + 1e-12 {
                            return Err(Error::Validation(format!("graph map expands the pair ({a}, {b})")));
                        }
                    }
                }
                Ok(())
            }
            (MapSpec::Composite { maps }, _) => {
                if maps.is_empty() {
                    return bad("composite needs at least one map");
                }
                maps.iter().try_for_each(|m| Self::check_shape(space, m))
            }
            _ => Err(Error::Mismatch),
        }
    }

    fn validate_samples(&self) -> Result<()> {
        let chart = Chart::new(&self.space);
        if !chart.supported() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_PAIRS {
            let reach = if rng.gen_bool(0.5) { 0.9 } else { 0.999 };
            let x = chart.sample_interior(&mut rng, reach);
            let y = chart.sample_interior(&mut rng, reach);
            let (fx, fy) = (self.apply(&x)?, self.apply(&y)?);
            let (d, e) = (self.space.d(&x, &y), self.space.d(&fx, &fy));
            if e > d * (1.0 + 1e-7) + 1e-9 {
                return Err(Error::Validation(format!(
                    "map expands a sampled pair: {e} > {d}"
                )));
            }
        }
        Ok(())
    }

    /// Image of `x`; fails if `x` or its image leaves the space.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.space.check(x)?;
        let y = self.image(x);
        self.space.check(&y).map_err(|_| Error::Domain(format!("image of {x:?} leaves {}", self.space.name())))?;
        Ok(y)
    }

    pub(crate) fn image(&self, x: &Point) -> Point {
        image(&self.spec, x)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &NonexpansiveMap) -> Result<NonexpansiveMap> {
        if self.space != inner.space {
            return Err(Error::Mismatch);
        }
        let spec = match (&self.spec, &inner.spec) {
            (MapSpec::Identity, s) | (s, MapSpec::Identity) => s.clone(),
            (MapSpec::MobiusDisk { matrix: a }, MapSpec::MobiusDisk { matrix: b }) => {
                MapSpec::MobiusDisk { matrix: mobius::mat_mul(a, b) }
            }
            (MapSpec::MobiusHalfPlane { matrix: a }, MapSpec::MobiusHalfPlane { matrix: b }) => {
                let m = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
                MapSpec::MobiusHalfPlane { matrix: [[m(0, 0), m(0, 1)], [m(1, 0), m(1, 1)]] }
            }
            (a, b) => {
                let mut maps = match a {
                    MapSpec::Composite { maps } => maps.clone(),
                    _ => vec![a.clone()],
                };
                match b {
                    MapSpec::Composite { maps: inner } => maps.extend(inner.iter().cloned()),
                    _ => maps.push(b.clone()),
                }
                MapSpec::Composite { maps }
            }
        };
        Ok(NonexpansiveMap::trusted(&self.space, spec))
    }

    pub fn power(&self, n: usize) -> Result<NonexpansiveMap> {
        let mut out = NonexpansiveMap::trusted(&self.space, MapSpec::Identity);
        for _ in 0..n {
            out = self.compose(&out)?;
        }
        Ok(out)
    }

    /// Inverse for isometric families with a closed form.
    pub fn inverse(&self) -> Option<NonexpansiveMap> {
        inverse_spec(&self.spec, &self.space).map(|spec| NonexpansiveMap::trusted(&self.space, spec))
    }

    /// Checks `d(fx, fy) = d(x, y)` on `pairs` sampled pairs.
    pub fn is_isometry_sampled(&self, pairs: usize, rng: &mut impl Rng) -> Result<bool> {
        if let SpaceKind::FiniteGraph(g) = &self.space.kind {
            let MapSpec::GraphMap { table } = &self.spec else {
                return Ok(matches!(self.spec, MapSpec::Identity));
            };
            return Ok((0..g.vertices)
                .all(|a| (0..g.vertices).all(|b| (g.distance(table[a], table[b]) - g.distance(a, b)).abs() < 1e-12)));
        }
        if let Some(m) = self.disk_matrix() {
            return Ok(mobius::is_automorphism(&m));
        }
        let chart = Chart::new(&self.space);
        for _ in 0..pairs {
            let x = chart.sample_interior(rng, 0.95);
            let y = chart.sample_interior(rng, 0.95);
            let d = self.space.d(&x, &y);
            let e = self.space.d(&self.apply(&x)?, &self.apply(&y)?);
            if (d - e).abs() > 1e-8 * d.max(1.0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Action on disk coordinates, for maps of the disk or half-plane by Möbius transformations.
    pub fn disk_matrix(&self) -> Option<Mat2> {
        disk_matrix(&self.spec)
    }

    pub fn mobius_class(&self) -> Option<MobiusClass> {
        self.disk_matrix().map(|m| mobius::classify(&m))
    }

    /// Exact normal form for hyperbolic Möbius automorphisms.
    pub fn frame(&self) -> Option<Frame> {
        if self.space.scale != 1.0 {
            return None;
        }
        self.disk_matrix().and_then(|m| Frame::new(&m))
    }

    /// Disk coordinate of a point of the disk or half-plane.
    pub fn disk_coord(p: &Point) -> Option<C64> {
        disk_coord(p)
    }

    /// Translation number when the family determines it in closed form.
    pub fn exact_tau(&self) -> Option<f64> {
        let s = self.space.scale;
        if let Some(class) = self.mobius_class() {
            return Some(s * class.tau());
        }
        match (&self.spec, &self.space.kind) {
            (MapSpec::Identity, _) => Some(0.0),
            (MapSpec::GraphMap { .. }, _) => Some(0.0),
            (MapSpec::PolydiscProduct { factors }, _) => {
                Some(s * factors.iter().map(|m| mobius::classify(m).tau()).fold(0.0, f64::max))
            }
            (MapSpec::MatrixOnSimplex { matrix }, _) => {
                let n = matrix.len();
                if matrix.iter().flatten().all(|v| *v > 0.0) {
                    return Some(0.0);
                }
                let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || matrix[i][j] == 0.0));
                if diagonal {
                    let d: Vec<f64> = (0..n).map(|i| matrix[i][i]).collect();
                    let hi = d.iter().cloned().fold(f64::MIN, f64::max);
                    let lo = d.iter().cloned().fold(f64::MAX, f64::min);
                    return Some(s * 0.5 * (hi / lo).ln());
                }
                None
            }
            (MapSpec::EuclideanAffine { linear, translation }, SpaceKind::NormedSpace { norm, .. }) => {
                if operator_norm(linear, *norm) < 1.0 - 1e-9 {
                    return Some(0.0);
                }
                if *norm == Norm::L2 && is_orthogonal(linear) {
                    let r = fixed_component(linear, translation);
                    return Some(s * r.iter().map(|x| x * x).sum::<f64>().sqrt());
                }
                None
            }
            _ => None,
        }
    }
}

fn disk_matrix(spec: &MapSpec) -> Option<Mat2> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    match spec {
        MapSpec::MobiusDisk { matrix } => Some(*matrix),
        MapSpec::MobiusHalfPlane { matrix } => Some(mobius::from_half_plane(*matrix)),
        MapSpec::Composite { maps } => {
            let mut m = [[one, zero], [zero, one]];
            for s in maps {
                m = mobius::mat_mul(&m, &disk_matrix(s)?);
            }
            Some(m)
        }
        _ => None,
    }
}

fn image(spec: &MapSpec, x: &Point) -> Point {
    match (spec, x) {
        (MapSpec::Identity, p) => p.clone(),
        (MapSpec::MobiusDisk { matrix }, Point::Disk(z)) => Point::Disk(mobius::act(matrix, *z)),
        (MapSpec::MobiusHalfPlane { matrix }, Point::HalfPlane(z)) => {
            let [[a, b], [c, d]] = *matrix;
            Point::HalfPlane((a * z + b) / (c * z + d))
        }
        (MapSpec::BallAutomorphism { unitary, point }, Point::Ball(z)) => {
            let w = ball_involution(point, z);
            Point::Ball(unitary.iter().map(|row| row.iter().zip(&w).map(|(u, v)| u * v).sum()).collect())
        }
        (MapSpec::PolydiscProduct { factors }, Point::Polydisc(z)) => {
            Point::Polydisc(factors.iter().zip(z).map(|(m, v)| mobius::act(m, *v)).collect())
        }
        (MapSpec::MatrixOnSimplex { matrix }, Point::Polytope(x)) => {
            let y = mat_vec(matrix, x);
            let total: f64 = y.iter().sum();
            Point::Polytope(y.iter().map(|v| v / total).collect())
        }
        (MapSpec::EuclideanAffine { linear, translation }, Point::Normed(x)) => {
            Point::Normed(mat_vec(linear, x).iter().zip(translation).map(|(a, b)| a + b).collect())
        }
        (MapSpec::GraphMap { table }, Point::Vertex(v)) => Point::Vertex(table[*v]),
        (MapSpec::Composite { maps }, p) => maps.iter().rev().fold(p.clone(), |acc, m| image(m, &acc)),
        (_, p) => p.clone(),
    }
}

fn inverse_spec(spec: &MapSpec, space: &ModelSpace) -> Option<MapSpec> {
    match spec {
        MapSpec::Identity => Some(MapSpec::Identity),
        MapSpec::MobiusDisk { matrix } if mobius::is_automorphism(matrix) => {
            Some(MapSpec::MobiusDisk { matrix: mobius::adj(matrix) })
        }
        MapSpec::MobiusHalfPlane { matrix } => {
            let [[a, b], [c, d]] = *matrix;
            Some(MapSpec::MobiusHalfPlane { matrix: [[d, -b], [-c, a]] })
        }
        MapSpec::BallAutomorphism { unitary, point } => {
            // φ_a U* = U* φ_{Ua}
            let n = point.len();
            let adj: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| unitary[j][i].conj()).collect()).collect();
            let ua = unitary.iter().map(|row| row.iter().zip(point).map(|(u, v)| u * v).sum()).collect();
            Some(MapSpec::BallAutomorphism { unitary: adj, point: ua })
        }
        MapSpec::PolydiscProduct { factors } if factors.iter().all(mobius::is_automorphism) => {
            Some(MapSpec::PolydiscProduct { factors: factors.iter().map(mobius::adj).collect() })
        }
        MapSpec::EuclideanAffine { linear, translation } => {
            let SpaceKind::NormedSpace { norm, .. } = space.kind else { return None };
            let isometric = match norm {
                Norm::L2 => is_orthogonal(linear),
                Norm::L1 => is_orthogonal(linear) && linear.iter().flatten().all(|v| *v == 0.0 || v.abs() == 1.0),
            };
            if !isometric {
                return None;
            }
            let lt = transpose(linear);
            let t = mat_vec(&lt, translation).iter().map(|v| -v).collect();
            Some(MapSpec::EuclideanAffine { linear: lt, translation: t })
        }
        MapSpec::GraphMap { table } => {
            let mut inv = vec![usize::MAX; table.len()];
            for (v, &w) in table.iter().enumerate() {
                if inv[w] != usize::MAX {
                    return None;
                }
                inv[w] = v;
            }
            Some(MapSpec::GraphMap { table: inv })
        }
        MapSpec::Composite { maps } => {
            let inv: Option<Vec<MapSpec>> = maps.iter().rev().map(|m| inverse_spec(m, space)).collect();
            inv.map(|maps| MapSpec::Composite { maps })
        }
        _ => None,
    }
}
