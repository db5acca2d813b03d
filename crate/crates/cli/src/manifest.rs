//! Run manifest: a structured record of everything a pipeline produced —
//! config digest, toolkit version, per-file checksums, and stage timings —
//! written atomically as the final artifact of a run so its presence
//! certifies completeness.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRecord {
    pub stage: String,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Worker threads the run was granted; the toolkit executes on one.
    pub threads: usize,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub files: Vec<FileRecord>,
    pub timings: Vec<TimingRecord>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_text: &str, seed: u64) -> Self {
        Self {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            threads: 1,
            success: false,
            failure: None,
            files: Vec::new(),
            timings: Vec::new(),
        }
    }

    /// Serializes and writes `manifest.toml` atomically into `dir`. Call
    /// last: every referenced output file must already be in place.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| CliError::Pipeline(format!("manifest serialization: {e}")))?;
        crate::output::write_atomic(dir, "manifest.toml", text.as_bytes())?;
        Ok(())
    }
}

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
