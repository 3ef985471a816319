//! Deterministic result emission: data files plus a manifest digesting them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Written last; lists every emitted data file with its content digest.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub config_sha256: String,
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Accumulates files for one output directory.
pub struct OutputBundle {
    dir: PathBuf,
    command: &'static str,
    config_sha256: String,
    files: Vec<ManifestEntry>,
}

impl OutputBundle {
    pub fn create(dir: &Path, command: &'static str, config_bytes: &[u8]) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(OutputBundle {
            dir: dir.to_path_buf(),
            command,
            config_sha256: sha256_hex(config_bytes),
            files: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        self.files.push(ManifestEntry {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Input(format!("cannot serialise {name}: {e}")))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Write the manifest and finish.
    pub fn finish(mut self) -> Result<Manifest, CliError> {
        self.files.sort_by(|a, b| a.name.cmp(&b.name));
        let manifest = Manifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: self.config_sha256.clone(),
            files: self.files.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Input(format!("cannot serialise manifest: {e}")))?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Build a CSV from a header and row formatter; plain `Display` float
/// formatting keeps output byte-stable and round-trip exact.
pub fn csv<T>(header: &str, rows: &[T], mut row: impl FnMut(&T, &mut String)) -> Vec<u8> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for r in rows {
        row(r, &mut text);
        text.push('\n');
    }
    text.into_bytes()
}
