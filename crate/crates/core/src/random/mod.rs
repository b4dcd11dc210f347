//! Random products `R_n = f₁ ∘ … ∘ f_n` of i.i.d. nonexpansive maps.

mod classical;
mod estimates;

pub use classical::{classical_expansions, Expansion, ExpansionKind};
pub use estimates::{
    ergodic_certificate, escape_rate, random_denjoy_wolff, ErgodicReport, EscapeRateEstimate, RandomDwReport, TrialLimit,
};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::mobius::{self, Mat2};
use crate::dynamics::{MapSpec, NonexpansiveMap};
use crate::spaces::{ModelSpace, Point};
use crate::{Error, Result, C64};

/// Default cap on trajectory length.
pub const MAX_STEPS: usize = 10_000;

/// Law of a positive coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoefficientLaw {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    /// `shift + Exp(rate)`.
    Exponential { rate: f64, shift: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Discrete { values: Vec<f64>, weights: Vec<f64> },
}

impl CoefficientLaw {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            CoefficientLaw::Constant { value } => *value,
            CoefficientLaw::Uniform { lo, hi } => rng.gen_range(*lo..=*hi),
            CoefficientLaw::Exponential { rate, shift } => shift + Exp::new(*rate).expect("checked rate").sample(rng),
            CoefficientLaw::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma).expect("checked sigma").sample(rng),
            CoefficientLaw::Discrete { values, weights } => {
                values[WeightedIndex::new(weights).expect("checked weights").sample(rng)]
            }
        }
    }

    /// Closure of the support as `(inf, sup)`.
    pub fn support(&self) -> Result<(f64, f64)> {
        let bad = |m: &str| Err(Error::Invalid(m.to_string()));
        match self {
            CoefficientLaw::Constant { value } if value.is_finite() => Ok((*value, *value)),
            CoefficientLaw::Uniform { lo, hi } if lo <= hi && lo.is_finite() && hi.is_finite() => Ok((*lo, *hi)),
            CoefficientLaw::Exponential { rate, shift } if *rate > 0.0 && shift.is_finite() => Ok((*shift, f64::INFINITY)),
            CoefficientLaw::LogNormal { sigma, mu } if *sigma >= 0.0 && mu.is_finite() => Ok((0.0, f64::INFINITY)),
            CoefficientLaw::Discrete { values, weights } => {
                check_weights(weights)?;
                if values.len() != weights.len() || values.iter().any(|v| !v.is_finite()) {
                    return bad("discrete law needs one finite value per weight");
                }
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Ok((lo, hi))
            }
            _ => bad("malformed coefficient law"),
        }
    }

    fn positive(&self) -> Result<bool> {
        let (lo, _) = self.support()?;
        Ok(lo > 0.0 || matches!(self, CoefficientLaw::LogNormal { .. }))
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() || w.iter().any(|p| !(*p >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("weights must be nonnegative and sum to 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum MapDistribution {
    FiniteSupport { space: ModelSpace, maps: Vec<MapSpec>, weights: Vec<f64> },
    /// `f(z) = a/(b + z)`, acting on the positive cone as `[[0, a], [1, b]]`.
    ContinuedFraction { a: CoefficientLaw, b: CoefficientLaw },
    /// `f(z) = √(a z + b)`.
    Radical { a: CoefficientLaw, b: CoefficientLaw },
    /// `f(z) = a^z`.
    IteratedExponential { a: CoefficientLaw },
}

/// Classical convergence range `[e^{−e}, e^{1/e}]` of power towers.
pub fn tower_range() -> (f64, f64) {
    ((-std::f64::consts::E).exp(), std::f64::consts::E.recip().exp())
}

impl MapDistribution {
    /// Validates weights, maps and coefficient domains.
    pub fn check(&self) -> Result<()> {
        match self {
            MapDistribution::FiniteSupport { space, maps, weights } => {
                check_weights(weights)?;
                if maps.len() != weights.len() {
                    return Err(Error::Invalid("one weight per map is required".into()));
                }
                maps.iter().try_for_each(|m| NonexpansiveMap::new(space, m.clone()).map(|_| ()))
            }
            MapDistribution::ContinuedFraction { a, b } => {
                if !a.positive()? || !b.positive()? {
                    return Err(Error::Domain("continued fraction coefficients must be positive".into()));
                }
                Ok(())
            }
            MapDistribution::Radical { a, b } => {
                if a.support()?.0 < 0.0 || b.support()?.0 < 0.0 {
                    return Err(Error::Domain("radical coefficients must be nonnegative".into()));
                }
                Ok(())
            }
            MapDistribution::IteratedExponential { a } => {
                let (lo, hi) = a.support()?;
                let (min, max) = tower_range();
                if lo < min || hi > max {
                    return Err(Error::Domain(format!("tower base law leaves the convergence range [{min:.6}, {max:.6}]")));
                }
                Ok(())
            }
        }
    }

    /// Space on which the maps act, for families with a map representation.
    pub fn space(&self) -> Result<ModelSpace> {
        match self {
            MapDistribution::FiniteSupport { space, .. } => Ok(space.clone()),
            MapDistribution::ContinuedFraction { .. } => ModelSpace::simplex(2),
            _ => Err(Error::unsupported("map representation", "scalar expansion family")),
        }
    }

    /// Sampled mean of `d(x₀, f x₀)`; finite for integrable laws.
    pub fn integrability(&self, samples: usize, seed: u64) -> Result<f64> {
        self.check()?;
        let traj = sample_trajectory(self, seed, samples.max(1))?;
        let mut total = 0.0;
        match &traj.maps {
            Some(maps) => {
                let space = &maps.space;
                for s in &traj.steps {
                    let f = traj.step_map(s, maps);
                    total += space.d(&space.basepoint, &f.apply(&space.basepoint)?);
                }
            }
            None => {
                for s in &traj.steps {
                    total += (scalar_step(&traj.kind, s, 1.0)?).ln().abs();
                }
            }
        }
        Ok(total / traj.steps.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Finite,
    ContinuedFraction,
    Radical,
    IteratedExponential,
}

/// One draw of the cocycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Map { index: usize },
    Coefficients { a: f64, b: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Support {
    space: ModelSpace,
    maps: Vec<NonexpansiveMap>,
}

/// Prefix product `M₁ ⋯ M_n` scaled to unit max entry, with the logs of the
/// removed scale and of the true determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub(crate) struct ScaledMat {
    pub m: Mat2,
    pub log_scale: f64,
    pub log_det: f64,
}

impl ScaledMat {
    fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        ScaledMat { m: [[o, z], [z, o]], log_scale: 0.0, log_det: 0.0 }
    }

    fn times(&self, f: &Mat2) -> Self {
        let p = mobius::mat_mul(&self.m, f);
        let s = p.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        ScaledMat {
            m: p.map(|r| r.map(|v| v / s)),
            log_scale: self.log_scale + s.ln(),
            log_det: self.log_det + mobius::det(f).norm().ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
enum Composed {
    /// Disk matrices of Möbius maps (half-plane maps are conjugated by Cayley).
    Mobius { prefix: Vec<ScaledMat>, automorphic: bool },
    /// Nonnegative matrices acting projectively on the simplex.
    Matrix { prefix: Vec<Vec<Vec<f64>>> },
}

/// Point or scalar argument of a backward product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Point(Point),
    Scalar(f64),
}

impl From<Point> for Value {
    fn from(p: Point) -> Self {
        Value::Point(p)
    }
}

/// Draws `f₁, …, f_N` with cached prefix products for composable families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleTrajectory {
    pub seed: u64,
    pub trial: u64,
    pub kind: Family,
    pub steps: Vec<Step>,
    #[serde(skip)]
    maps: Option<Support>,
    #[serde(skip)]
    composed: Option<Composed>,
}

/// Generator for trial `trial` of an experiment seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn real_mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut p: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect();
    let s = p.iter().flatten().cloned().fold(0.0, f64::max);
    p.iter_mut().flatten().for_each(|v| *v /= s);
    p
}

fn cf_matrix(a: f64, b: f64) -> Vec<Vec<f64>> {
    vec![vec![0.0, a], vec![1.0, b]]
}

/// Barycentric point of the positive cone representing `z ∈ [0, ∞)`.
pub fn cone_point(z: f64) -> Point {
    Point::Polytope(vec![z / (1.0 + z), 1.0 / (1.0 + z)])
}

/// Inverse of [`cone_point`].
pub fn cone_value(p: &Point) -> Option<f64> {
    match p {
        Point::Polytope(x) if x.len() == 2 => Some(x[0] / x[1]),
        _ => None,
    }
}

fn scalar_step(kind: &Family, s: &Step, z: f64) -> Result<f64> {
    let Step::Coefficients { a, b } = *s else { return Err(Error::Mismatch) };
    let v = match kind {
        Family::ContinuedFraction => a / (b + z),
        Family::Radical => (a * z + b).sqrt(),
        Family::IteratedExponential => a.powf(z),
        Family::Finite => return Err(Error::Mismatch),
    };
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("expansion left its domain at z = {z}")));
    }
    Ok(v)
}

/// Samples the first `n` draws of trial 0.
pub fn sample_trajectory(dist: &MapDistribution, seed: u64, n: usize) -> Result<CocycleTrajectory> {
    sample_trial(dist, seed, 0, n)
}

/// Samples the first `n` draws of trial `trial`.
pub fn sample_trial(dist: &MapDistribution, seed: u64, trial: u64, n: usize) -> Result<CocycleTrajectory> {
    if n == 0 {
        return Err(Error::Invalid("trajectory length must be at least 1".into()));
    }
    if n > MAX_STEPS {
        return Err(Error::Invalid(format!("trajectory length is capped at {MAX_STEPS}")));
    }
    dist.check()?;
    let mut rng = trial_rng(seed, trial);
    let (kind, steps, maps): (Family, Vec<Step>, Option<Support>) = match dist {
        MapDistribution::FiniteSupport { space, maps, weights } => {
            let idx = WeightedIndex::new(weights).map_err(|e| Error::Invalid(e.to_string()))?;
            let steps = (0..n).map(|_| Step::Map { index: idx.sample(&mut rng) }).collect();
            let maps = maps.iter().map(|m| NonexpansiveMap::trusted(space, m.clone())).collect();
            (Family::Finite, steps, Some(Support { space: space.clone(), maps }))
        }
        MapDistribution::ContinuedFraction { a, b } => {
            let steps = (0..n).map(|_| Step::Coefficients { a: a.sample(&mut rng), b: b.sample(&mut rng) }).collect();
            (Family::ContinuedFraction, steps, Some(Support { space: ModelSpace::simplex(2)?, maps: Vec::new() }))
        }
        MapDistribution::Radical { a, b } => {
            let steps = (0..n).map(|_| Step::Coefficients { a: a.sample(&mut rng), b: b.sample(&mut rng) }).collect();
            (Family::Radical, steps, None)
        }
        MapDistribution::IteratedExponential { a } => {
            let steps = (0..n).map(|_| Step::Coefficients { a: a.sample(&mut rng), b: 0.0 }).collect();
            (Family::IteratedExponential, steps, None)
        }
    };
    let mut traj = CocycleTrajectory { seed, trial, kind, steps, maps, composed: None };
    traj.composed = traj.compose();
    Ok(traj)
}

impl CocycleTrajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn space(&self) -> Option<&ModelSpace> {
        self.maps.as_ref().map(|m| &m.space)
    }

    /// True when a closed-form product is maintained.
    pub fn has_composed(&self) -> bool {
        self.composed.is_some()
    }

    fn step_map(&self, s: &Step, support: &Support) -> NonexpansiveMap {
        match *s {
            Step::Map { index } => support.maps[index].clone(),
            Step::Coefficients { a, b } => {
                NonexpansiveMap::trusted(&support.space, MapSpec::MatrixOnSimplex { matrix: cf_matrix(a, b) })
            }
        }
    }

    /// The `k`-th map `f_k` (1-based).
    pub fn map(&self, k: usize) -> Result<NonexpansiveMap> {
        let support = self.maps.as_ref().ok_or_else(|| Error::unsupported("map", "scalar expansion family"))?;
        let s = self.steps.get(k.wrapping_sub(1)).ok_or_else(|| Error::Invalid(format!("no draw {k}")))?;
        Ok(self.step_map(s, support))
    }

    fn compose(&self) -> Option<Composed> {
        let support = self.maps.as_ref()?;
        match self.kind {
            Family::ContinuedFraction => {
                let mut prefix = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]];
                for s in &self.steps {
                    let Step::Coefficients { a, b } = *s else { return None };
                    let next = real_mat_mul(prefix.last()?, &cf_matrix(a, b));
                    prefix.push(next);
                }
                Some(Composed::Matrix { prefix })
            }
            Family::Finite => {
                let mats: Option<Vec<Mat2>> = support.maps.iter().map(|m| m.disk_matrix()).collect();
                if let Some(mats) = mats {
                    let automorphic = mats.iter().all(mobius::is_automorphism) && support.space.scale == 1.0;
                    let mut prefix = vec![ScaledMat::identity()];
                    for s in &self.steps {
                        let Step::Map { index } = *s else { return None };
                        let next = prefix.last()?.times(&mats[index]);
                        prefix.push(next);
                    }
                    return Some(Composed::Mobius { prefix, automorphic });
                }
                let mats: Option<Vec<Vec<Vec<f64>>>> = support
                    .maps
                    .iter()
                    .map(|m| match m.spec() {
                        MapSpec::MatrixOnSimplex { matrix } => Some(matrix.clone()),
                        _ => None,
                    })
                    .collect();
                let mats = mats?;
                let n = mats.first()?.len();
                let id: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
                let mut prefix = vec![id];
                for s in &self.steps {
                    let Step::Map { index } = *s else { return None };
                    let next = real_mat_mul(prefix.last()?, &mats[index]);
                    prefix.push(next);
                }
                Some(Composed::Matrix { prefix })
            }
            _ => None,
        }
    }

    pub(crate) fn mobius_prefix(&self, n: usize) -> Option<(ScaledMat, bool)> {
        match &self.composed {
            Some(Composed::Mobius { prefix, automorphic }) => prefix.get(n).map(|p| (*p, *automorphic)),
            _ => None,
        }
    }

    /// `R_n(x)` by the recursion `f₁(f₂(⋯ f_n(x)))`.
    pub fn evaluate_recursive(&self, x: &Value, n: usize) -> Result<Value> {
        if n > self.len() {
            return Err(Error::Invalid(format!("n = {n} exceeds the trajectory length")));
        }
        match (x, &self.maps) {
            (Value::Point(p), Some(support)) => {
                support.space.check(p)?;
                let mut y = p.clone();
                for s in self.steps[..n].iter().rev() {
                    y = self.step_map(s, support).apply(&y)?;
                }
                Ok(Value::Point(y))
            }
            (Value::Scalar(z), _) if self.kind != Family::Finite => {
                let mut v = *z;
                for s in self.steps[..n].iter().rev() {
                    v = scalar_step(&self.kind, s, v)?;
                }
                Ok(Value::Scalar(v))
            }
            _ => Err(Error::Mismatch),
        }
    }

    fn evaluate_composed(&self, x: &Value, n: usize) -> Option<Result<Value>> {
        let composed = self.composed.as_ref()?;
        let Value::Point(p) = x else { return None };
        let space = &self.maps.as_ref()?.space;
        if let Err(e) = space.check(p) {
            return Some(Err(e));
        }
        let y = match composed {
            Composed::Mobius { prefix, .. } => {
                let w = mobius::act(&prefix[n].m, NonexpansiveMap::disk_coord(p)?);
                match p {
                    Point::HalfPlane(_) => Point::HalfPlane(mobius::act(&mobius::cayley_inv(), w)),
                    _ => Point::Disk(w),
                }
            }
            Composed::Matrix { prefix } => {
                let Point::Polytope(v) = p else { return None };
                let y: Vec<f64> = prefix[n].iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
                let t: f64 = y.iter().sum();
                Point::Polytope(y.iter().map(|c| c / t).collect())
            }
        };
        Some(space.check(&y).map(|_| Value::Point(y)))
    }
}

/// `R_n(x)`, through the composed product when the family maintains one.
pub fn evaluate_backward(traj: &CocycleTrajectory, x: &Value, n: usize) -> Result<Value> {
    if n > traj.len() {
        return Err(Error::Invalid(format!("n = {n} exceeds the trajectory length")));
    }
    if let (Value::Scalar(z), Some(Composed::Matrix { prefix })) = (x, &traj.composed) {
        if traj.kind == Family::ContinuedFraction && *z >= 0.0 {
            let p = &prefix[n];
            return Ok(Value::Scalar((p[0][0] * z + p[0][1]) / (p[1][0] * z + p[1][1])));
        }
    }
    match traj.evaluate_composed(x, n) {
        Some(r) => r,
        None => traj.evaluate_recursive(x, n),
    }
}

#[cfg(test)]
mod tests;
