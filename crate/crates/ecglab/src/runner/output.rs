//! Output bundles, checksummed run records and the append-only runs index.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// An in-memory output file; bundles are fully assembled before anything
/// touches the disk, and their bytes are a pure function of (config, seed).
#[derive(Debug, Clone)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct OutputBundle {
    pub files: Vec<OutputFile>,
}

impl OutputBundle {
    pub fn push(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push(OutputFile {
            name: name.into(),
            bytes,
        });
    }

    pub fn push_csv(&mut self, name: impl Into<String>, header: &str, rows: &[String]) {
        let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        self.push(name, text.into_bytes());
    }

    pub fn push_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| crate::EcgError::Config(format!("json serialization: {e}")))?;
        bytes.push(b'\n');
        self.push(name, bytes);
        Ok(())
    }

    pub fn file_names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.name.clone()).collect()
    }

    /// Writes every file under `dir`, creating it if needed, and returns the
    /// manifest of (name, sha256) pairs in bundle order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<FileDigest>> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Vec::with_capacity(self.files.len());
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.bytes)?;
            manifest.push(FileDigest {
                name: f.name.clone(),
                sha256: sha256_hex(&f.bytes),
            });
        }
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
}

/// Record of one run: configuration snapshot, tool version, wall clock and
/// the output manifest.  Re-running the same configuration reproduces the
/// manifest checksums byte for byte; the wall clock is informational.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub config: crate::runner::config::ExperimentConfig,
    pub wall_ms: u128,
    pub outputs: Vec<FileDigest>,
}

impl RunRecord {
    pub fn new(
        config: &crate::runner::config::ExperimentConfig,
        wall_ms: u128,
        outputs: Vec<FileDigest>,
    ) -> Self {
        RunRecord {
            tool: "ecglab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            wall_ms,
            outputs,
        }
    }

    /// Appends the record to `runs.jsonl` in the output directory.
    pub fn append_to_index(&self, dir: &Path) -> Result<()> {
        use std::io::Write;
        std::fs::create_dir_all(dir)?;
        let line = serde_json::to_string(self)
            .map_err(|e| crate::EcgError::Config(format!("json serialization: {e}")))?;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("runs.jsonl"))?;
        writeln!(file, "{line}")?;
        Ok(())
    }
}
