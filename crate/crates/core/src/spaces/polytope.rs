//! Convex polytopes in H-representation and their Hilbert metric.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Half-space `normal · x <= offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// A face, identified by the sorted ids of the facets that contain it.
///
/// The empty set denotes the interior; larger sets denote smaller faces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face(pub Vec<usize>);

impl Face {
    /// True when the closed face `self` contains a point whose minimal face is `other`.
    pub fn contains(&self, other: &Face) -> bool {
        self.0.iter().all(|f| other.0.binary_search(f).is_ok())
    }

    pub fn shares_facet(&self, other: &Face) -> bool {
        self.0.iter().any(|f| other.0.binary_search(f).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
    /// Points are barycentric vectors summing to one (standard simplex).
    pub barycentric: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One-dimensional null space of a `rows x cols` system (cols = rows + 1), if it exists.
fn null_vector(mut m: Vec<Vec<f64>>, cols: usize) -> Option<Vec<f64>> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            continue;
        }
        m.swap(r, p);
        let piv = m[r][c];
        for v in m[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        m[i][j] -= f * m[r][j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() != cols - 1 {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![0.0; cols];
    v[free] = 1.0;
    for (i, &c) in pivots.iter().enumerate() {
        v[c] = -m[i][free];
    }
    Some(v)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl Polytope {
    /// Full-dimensional polytope given as the convex hull of `vertices`.
    ///
    /// Facets are found by testing every affinely independent `d`-subset of
    /// vertices, which is fine for the small vertex counts used here.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices.first().map(Vec::len).unwrap_or(0);
        if d == 0 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::Invalid("polytope vertices must share a positive dimension".into()));
        }
        if vertices.len() < d + 1 {
            return Err(Error::Invalid("polytope has empty interior".into()));
        }
        let scale = vertices
            .iter()
            .flat_map(|v| v.iter().map(|x| x.abs()))
            .fold(1.0f64, f64::max);
        let eps = 1e-10 * scale;
        let mut facets: Vec<Facet> = Vec::new();
        for subset in combinations(vertices.len(), d) {
            let rows: Vec<Vec<f64>> = subset
                .iter()
                .map(|&i| {
                    let mut r = vertices[i].clone();
                    r.push(-1.0);
                    r
                })
                .collect();
            let Some(v) = null_vector(rows, d + 1) else { continue };
            let mut normal = v[..d].to_vec();
            let nn = norm(&normal);
            if nn < 1e-12 {
                continue;
            }
            let mut offset = v[d] / nn;
            normal.iter_mut().for_each(|x| *x /= nn);
            let sides: Vec<f64> = vertices.iter().map(|p| dot(&normal, p) - offset).collect();
            let above = sides.iter().any(|s| *s > eps);
            let below = sides.iter().any(|s| *s < -eps);
            if above && below {
                continue;
            }
            if above {
                normal.iter_mut().for_each(|x| *x = -*x);
                offset = -offset;
            }
            let dup = facets.iter().any(|f| {
                (f.offset - offset).abs() < eps
                    && f.normal.iter().zip(&normal).all(|(a, b)| (a - b).abs() < 1e-9)
            });
            if !dup {
                facets.push(Facet { normal, offset });
            }
        }
        if facets.len() < d + 1 {
            return Err(Error::Invalid("polytope has empty interior".into()));
        }
        let p = Polytope {
            vertices,
            facets,
            barycentric: false,
        };
        let c = p.centroid();
        if p.facets.iter().any(|f| f.slack(&c) <= eps) {
            return Err(Error::Invalid("polytope has empty interior".into()));
        }
        Ok(p)
    }

    /// Open standard simplex of barycentric vectors in `R^n`.
    pub fn simplex(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid("simplex needs at least two vertices".into()));
        }
        let vertices = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let facets = (0..n)
            .map(|i| Facet {
                normal: (0..n).map(|j| if i == j { -1.0 } else { 0.0 }).collect(),
                offset: 0.0,
            })
            .collect();
        Ok(Polytope {
            vertices,
            facets,
            barycentric: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.vertices.len() as f64;
        let mut c = vec![0.0; self.dim()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / n;
            }
        }
        c
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        if self.barycentric && (x.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return false;
        }
        self.facets.iter().all(|f| f.slack(x) > 0.0)
    }

    pub fn on_boundary(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        if self.barycentric && (x.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return false;
        }
        let min = self.facets.iter().map(|f| f.slack(x)).fold(f64::INFINITY, f64::min);
        min.abs() <= tol && self.facets.iter().all(|f| f.slack(x) >= -tol)
    }

    /// Minimal face containing a boundary point.
    pub fn face_of(&self, x: &[f64], tol: f64) -> Face {
        Face(
            self.facets
                .iter()
                .enumerate()
                .filter(|(_, f)| f.slack(x).abs() <= tol)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// Euclidean distance to the topological boundary (within the affine hull).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let fudge = if self.barycentric {
            // distance inside the hyperplane sum = 1
            let n = self.dim() as f64;
            (n / (n - 1.0)).sqrt()
        } else {
            1.0
        };
        self.facets
            .iter()
            .map(|f| f.slack(x) / norm(&f.normal) * fudge)
            .fold(f64::INFINITY, f64::min)
    }

    /// Hilbert distance `½ log` of the cross-ratio along the chord through `x`, `y`.
    pub fn hilbert(&self, x: &[f64], y: &[f64]) -> f64 {
        if x == y {
            return 0.0;
        }
        let v: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        // forward exit t+ and backward exit t- expressed through slacks at x and y
        let (mut plus_x, mut plus_y) = (f64::INFINITY, f64::INFINITY);
        let (mut minus_x, mut minus_y) = (f64::INFINITY, f64::INFINITY);
        for f in &self.facets {
            let w = dot(&f.normal, &v);
            let sx = f.slack(x);
            let sy = f.slack(y);
            if w > 0.0 {
                let tx = sx / w;
                if tx < plus_x {
                    plus_x = tx;
                    plus_y = sy / w;
                }
            } else if w < 0.0 {
                let tx = sx / -w;
                if tx < minus_x {
                    minus_x = tx;
                    minus_y = sy / -w;
                }
            }
        }
        let fwd = if plus_x.is_finite() {
            plus_x.ln() - plus_y.ln()
        } else {
            0.0
        };
        let bwd = if minus_x.is_finite() {
            minus_y.ln() - minus_x.ln()
        } else {
            0.0
        };
        0.5 * (fwd + bwd)
    }

    /// Chord parameters `(t-, t+)` of the line `x + t (y - x)` leaving the polytope.
    pub fn chord(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let v: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let mut tp = f64::INFINITY;
        let mut tm = f64::NEG_INFINITY;
        for f in &self.facets {
            let w = dot(&f.normal, &v);
            let s = f.slack(x);
            if w > 0.0 {
                tp = tp.min(s / w);
            } else if w < 0.0 {
                tm = tm.max(s / w);
            }
        }
        (tm, tp)
    }

    /// Pairs of vertices spanning an edge (a one-dimensional face).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.dim() - usize::from(self.barycentric);
        if d < 2 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                let mid: Vec<f64> = self.vertices[i]
                    .iter()
                    .zip(&self.vertices[j])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                if self.face_of(&mid, 1e-9).0.len() + 1 >= d {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::from_vertices(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn square_has_four_facets_and_edges() {
        let p = square();
        assert_eq!(p.facets.len(), 4);
        assert_eq!(p.edges().len(), 4);
        assert!((p.boundary_distance(&[0.5, 0.25]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn segment_cross_ratio() {
        let seg = Polytope::from_vertices(vec![vec![0.0], vec![1.0]]).unwrap();
        let d = seg.hilbert(&[0.25], &[0.75]);
        assert!((d - 0.5 * 9f64.ln()).abs() < 1e-12);
        let s = Polytope::simplex(2).unwrap();
        let d2 = s.hilbert(&[0.25, 0.75], &[0.75, 0.25]);
        assert!((d2 - 0.5 * 9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn simplex_matches_projective_formula() {
        let s = Polytope::simplex(3).unwrap();
        let x = [0.2, 0.3, 0.5];
        let y = [0.6, 0.1, 0.3];
        let r1 = x.iter().zip(&y).map(|(a, b)| a / b).fold(0.0, f64::max);
        let r2 = x.iter().zip(&y).map(|(a, b)| b / a).fold(0.0, f64::max);
        assert!((s.hilbert(&x, &y) - 0.5 * (r1 * r2).ln()).abs() < 1e-12);
        assert_eq!(s.edges().len(), 3);
    }

    #[test]
    fn degenerate_vertex_sets_rejected() {
        assert!(Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        assert!(Polytope::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn faces_of_square_points() {
        let p = square();
        let v = p.face_of(&[0.0, 0.0], 1e-12);
        let e = p.face_of(&[0.5, 0.0], 1e-12);
        assert_eq!(v.0.len(), 2);
        assert_eq!(e.0.len(), 1);
        assert!(e.contains(&v));
        assert!(!v.contains(&e));
    }
}
