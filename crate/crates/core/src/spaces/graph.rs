//! Finite weighted graphs with all-pairs shortest paths.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(skip)]
    dist: Vec<Vec<f64>>,
    #[serde(skip)]
    next: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::Invalid("graph needs at least one vertex".into()));
        }
        let mut dist = vec![vec![f64::INFINITY; vertices]; vertices];
        let mut next = vec![vec![usize::MAX; vertices]; vertices];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
            next[i][i] = i;
        }
        for &(a, b, w) in &edges {
            if a >= vertices || b >= vertices {
                return Err(Error::Invalid(format!("edge ({a},{b}) out of range")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Invalid(format!("edge ({a},{b}) has non-positive weight")));
            }
            if w < dist[a][b] {
                dist[a][b] = w;
                dist[b][a] = w;
                next[a][b] = b;
                next[b][a] = a;
            }
        }
        for k in 0..vertices {
            for i in 0..vertices {
                for j in 0..vertices {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                        next[i][j] = next[i][k];
                    }
                }
            }
        }
        if dist.iter().flatten().any(|d| d.is_infinite()) {
            return Err(Error::Invalid("graph is not connected".into()));
        }
        Ok(Graph {
            vertices,
            edges,
            dist,
            next,
        })
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            cur = self.next[cur][b];
            path.push(cur);
        }
        path
    }

    /// Rebuilds the path tables after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        Graph::new(self.vertices, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_paths_on_a_square_with_diagonal() {
        let g = Graph::new(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 3.0)]).unwrap();
        assert_eq!(g.distance(0, 2), 2.0);
        let p = g.shortest_path(0, 2);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn disconnected_graph_rejected() {
        assert!(Graph::new(3, vec![(0, 1, 1.0)]).is_err());
        assert!(Graph::new(2, vec![(0, 1, -1.0)]).is_err());
    }
}
