//! Experiment configuration files (TOML or JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use starbound::dynamics::MapSpec;
use starbound::io::SpaceSpec;
use starbound::random::{CoefficientLaw, MapDistribution};
use starbound::spaces::ModelSpace;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Distance evaluations per star test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

/// Coordinates are interior chart coordinates (points) or boundary coordinates (ξ, η).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    SpaceDist {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    StarTest {
        xi: Vec<f64>,
        eta: Vec<f64>,
        #[serde(default)]
        dual: bool,
    },
    StarMatrix {
        samples: Vec<Vec<f64>>,
    },
    StarAtlas {
        samples: usize,
        mesh: usize,
    },
    DynIterate {
        map: MapSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
    },
    DynTau {
        map: MapSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
    },
    DynDw {
        map: MapSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
    },
    DynCertificate {
        map: MapSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
        /// Boundary points whose Busemann functions are tried besides the default candidates.
        #[serde(default)]
        candidates: Vec<Vec<f64>>,
    },
    DynTrack {
        map: MapSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
    },
    RandEscape {
        dist: DistSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        n: usize,
        trials: usize,
    },
    RandDw {
        dist: DistSpec,
        #[serde(default)]
        x: Option<Vec<f64>>,
        #[serde(default)]
        y: Option<Vec<f64>>,
        n: usize,
        trials: usize,
    },
    RandCf {
        dist: DistSpec,
        n: usize,
    },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::SpaceDist { .. } => "space_dist",
            Operation::StarTest { .. } => "star_test",
            Operation::StarMatrix { .. } => "star_matrix",
            Operation::StarAtlas { .. } => "star_atlas",
            Operation::DynIterate { .. } => "dyn_iterate",
            Operation::DynTau { .. } => "dyn_tau",
            Operation::DynDw { .. } => "dyn_dw",
            Operation::DynCertificate { .. } => "dyn_certificate",
            Operation::DynTrack { .. } => "dyn_track",
            Operation::RandEscape { .. } => "rand_escape",
            Operation::RandDw { .. } => "rand_dw",
            Operation::RandCf { .. } => "rand_cf",
        }
    }

    pub fn stochastic(&self) -> bool {
        matches!(self, Operation::RandEscape { .. } | Operation::RandDw { .. } | Operation::RandCf { .. })
    }

    /// Whether the operation reads the `[space]` section.
    pub fn needs_space(&self) -> bool {
        match self {
            Operation::RandEscape { dist, .. } | Operation::RandDw { dist, .. } | Operation::RandCf { dist, .. } => {
                matches!(dist, DistSpec::FiniteSupport { .. })
            }
            _ => true,
        }
    }
}

/// Law of the i.i.d. maps; finite supports act on the configured space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    FiniteSupport { maps: Vec<MapSpec>, weights: Vec<f64> },
    ContinuedFraction { a: CoefficientLaw, b: CoefficientLaw },
    Radical { a: CoefficientLaw, b: CoefficientLaw },
    IteratedExponential { a: CoefficientLaw },
}

impl DistSpec {
    pub fn build(&self, space: Option<&ModelSpace>) -> Result<MapDistribution, CliError> {
        Ok(match self.clone() {
            DistSpec::FiniteSupport { maps, weights } => {
                let space = space.ok_or_else(|| CliError::Config("finite_support needs a [space] section".into()))?;
                MapDistribution::FiniteSupport { space: space.clone(), maps, weights }
            }
            DistSpec::ContinuedFraction { a, b } => MapDistribution::ContinuedFraction { a, b },
            DistSpec::Radical { a, b } => MapDistribution::Radical { a, b },
            DistSpec::IteratedExponential { a } => MapDistribution::IteratedExponential { a },
        })
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.extension().and_then(|e| e.to_str()) == Some("json"))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring where outputs go.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&ExperimentConfig { output: None, ..self.clone() }).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn build_space(&self) -> Result<Option<ModelSpace>, CliError> {
        self.space.as_ref().map(|s| s.build().map_err(|e| CliError::Config(e.to_string()))).transpose()
    }
}
