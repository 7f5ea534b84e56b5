//! Run manifest: the configuration echo plus a SHA-256 per artifact.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash `files` (relative to `dir`) as they are on disk and write the manifest next to them.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    files: &[String],
) -> Result<Manifest> {
    let mut artifacts = Vec::with_capacity(files.len());
    for f in files {
        let bytes = fs::read(dir.join(f))?;
        artifacts.push(Artifact {
            file: f.clone(),
            bytes: bytes.len() as u64,
            sha256: checksum(&bytes),
        });
    }
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: config.clone(),
        artifacts,
    };
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&m)? + "\n",
    )?;
    Ok(m)
}
