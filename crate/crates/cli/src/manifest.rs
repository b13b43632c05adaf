//! Run manifests: configuration snapshot, wall-clock bracket, termination
//! reason, and content digests of every emitted artifact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SimConfig;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot parse manifest: {0}")]
    Parse(String),
    #[error("artifact {path}: {problem}")]
    Integrity { path: String, problem: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub code_version: String,
    pub started_at: String,
    pub ended_at: String,
    /// completed | halted-boundary | halted-dt-underflow
    pub termination: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination_detail: Option<String>,
    pub accepted_steps: usize,
    pub config: SimConfig,
    #[serde(default)]
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

pub const MANIFEST_FORMAT: &str = "muskat-run-manifest-v1";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn digest_file(path: &Path) -> Result<String, ManifestError> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, ManifestError> {
        let text = toml::to_string_pretty(self).map_err(|e| ManifestError::Parse(e.to_string()))?;
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let m: RunManifest = toml::from_str(&text).map_err(|e| ManifestError::Parse(e.to_string()))?;
        if m.format != MANIFEST_FORMAT {
            return Err(ManifestError::Parse(format!(
                "unknown manifest format '{}'",
                m.format
            )));
        }
        Ok(m)
    }

    /// Every listed artifact exists and its digest matches.
    pub fn verify(&self, dir: &Path) -> Result<(), ManifestError> {
        for a in &self.artifacts {
            let path = dir.join(&a.path);
            if !path.exists() {
                return Err(ManifestError::Integrity {
                    path: a.path.clone(),
                    problem: "missing".into(),
                });
            }
            let got = digest_file(&path)?;
            if got != a.sha256 {
                return Err(ManifestError::Integrity {
                    path: a.path.clone(),
                    problem: format!("digest mismatch: manifest {} vs file {got}", a.sha256),
                });
            }
        }
        Ok(())
    }
}
