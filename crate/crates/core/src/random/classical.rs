//! Continued fractions, infinite radicals and power towers as backward products.

use serde::{Deserialize, Serialize};

use super::{evaluate_backward, sample_trajectory, Family, MapDistribution, Value};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    ContinuedFraction,
    Radical,
    IteratedExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub kind: ExpansionKind,
    /// `R_n(x_init)` for `n = 1, …, N`.
    pub values: Vec<f64>,
    /// `|R_N − R_{N−1}|`.
    pub residual: f64,
}

impl Expansion {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("at least one term")
    }
}

/// Values `R_n(x_init)` with `x_init = 0`, or `1` for towers. Costs `O(N²)` for radicals and towers.
pub fn classical_expansions(dist: &MapDistribution, seed: u64, n: usize) -> Result<Expansion> {
    let traj = sample_trajectory(dist, seed, n)?;
    let (kind, init) = match traj.kind {
        Family::ContinuedFraction => (ExpansionKind::ContinuedFraction, 0.0),
        Family::Radical => (ExpansionKind::Radical, 0.0),
        Family::IteratedExponential => (ExpansionKind::IteratedExponential, 1.0),
        Family::Finite => return Err(Error::unsupported("classical_expansions", "finite support distribution")),
    };
    let values = (1..=n)
        .map(|k| match evaluate_backward(&traj, &Value::Scalar(init), k)? {
            Value::Scalar(v) => Ok(v),
            Value::Point(_) => Err(Error::Mismatch),
        })
        .collect::<Result<Vec<f64>>>()?;
    let residual = if n >= 2 { (values[n - 1] - values[n - 2]).abs() } else { f64::INFINITY };
    Ok(Expansion { kind, values, residual })
}
