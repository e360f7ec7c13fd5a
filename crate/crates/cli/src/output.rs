//! Per-run output directories and the manifest that describes them.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the run directory.
    pub path: String,
    pub stage: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<String>,
    /// SHA-256 of the configuration file bytes (empty input when no file).
    pub config_file_sha256: String,
    /// SHA-256 of the resolved configuration's canonical JSON.
    pub config_sha256: String,
    pub seed: u64,
    pub amplitude_scale: f64,
    pub sidebands_observable: bool,
    pub defaulted_fields: Vec<String>,
    pub notes: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
    pub files: Vec<FileRecord>,
    /// Command-specific figures of merit.
    pub summary: serde_json::Value,
}

/// A freshly created, uniquely named output directory.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    files: Vec<FileRecord>,
    started_at: String,
}

impl RunDir {
    /// Creates `<root>/<command>-<config hash>-s<seed>-<timestamp>-<n>`,
    /// bumping `n` until the name is unused.
    pub fn create(root: &Path, command: &str, cfg: &RunConfig) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let now = Utc::now();
        let stem = format!(
            "{command}-{}-s{}-{}",
            &cfg.hash()[..12],
            cfg.seed,
            now.format("%Y%m%dT%H%M%S%.3fZ")
        );
        for n in 0..10_000 {
            let path = root.join(format!("{stem}-{n}"));
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(Self {
                        path,
                        files: Vec::new(),
                        started_at: now.to_rfc3339_opts(SecondsFormat::Millis, true),
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(CliError::io(&path, e)),
            }
        }
        Err(CliError::io(root, "could not find a free run directory name"))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write(&mut self, name: &str, stage: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.path.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileRecord {
            path: name.to_string(),
            stage: stage.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, stage: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        self.write(name, stage, text.as_bytes())
    }

    pub fn finish(self, command: &str, cfg: &RunConfig, summary: serde_json::Value) -> CliResult<Manifest> {
        let manifest = Manifest {
            tool: "spinaxion".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_path: cfg.source.as_ref().map(|p| p.display().to_string()),
            config_file_sha256: cfg.source_sha256.clone(),
            config_sha256: cfg.hash(),
            seed: cfg.seed,
            amplitude_scale: cfg.amplitude_scale,
            sidebands_observable: cfg.sidebands_observable,
            defaulted_fields: cfg.defaulted.clone(),
            notes: cfg.notes.clone(),
            started_at: self.started_at.clone(),
            finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            files: self.files.clone(),
            summary,
        };
        let path = self.path.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(&path, e))
}
