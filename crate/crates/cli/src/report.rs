use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Headline verdict of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Inconclusive,
    Undecided,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Inconclusive | Status::Undecided => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub operation: String,
    pub status: Status,
    pub summary: Value,
    pub artifacts: Vec<String>,
    pub provenance: Provenance,
    /// Resolved configuration, flags applied; re-running it reproduces the summary.
    pub config: ExperimentConfig,
}

/// A file produced next to the report.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Artifact { name: name.into(), bytes: bytes.into() }
    }
}

impl Report {
    pub fn new(operation: &str, status: Status, summary: Value, artifacts: &[Artifact], config: &ExperimentConfig) -> Self {
        Report {
            operation: operation.to_string(),
            status,
            summary,
            artifacts: artifacts.iter().map(|a| a.name.clone()).collect(),
            provenance: Provenance {
                config_hash: config.hash(),
                seed: config.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes the artifacts and `report.json` into `dir`; returns the report path.
pub fn emit(dir: &Path, report: &Report, artifacts: &[Artifact]) -> Result<PathBuf, CliError> {
    for a in artifacts {
        write_atomic(&dir.join(&a.name), &a.bytes)?;
    }
    let path = dir.join("report.json");
    write_atomic(&path, report.to_json().as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Ok.exit_code(), 0);
        assert_eq!(Status::Inconclusive.exit_code(), 3);
        assert_eq!(Status::Undecided.exit_code(), 3);
        assert_ne!(Status::Failed.exit_code(), 0);
    }
}
