//! Run manifest: resolved config, versions, RNG algorithm, timings, and a
//! checksummed inventory of every emitted file. Written atomically at the
//! end of a run so partial outputs are never manifested.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub rng_algorithm: String,
    pub config: RunConfig,
    pub timings_ms: BTreeMap<String, u128>,
    pub files: Vec<FileEntry>,
    pub results: serde_json::Value,
}

/// Collects outputs for one run directory and writes the manifest last.
pub struct RunWriter {
    dir: PathBuf,
    manifest: RunManifest,
    stage_started: Option<(String, Instant)>,
}

impl RunWriter {
    pub fn new(dir: &Path, command: &str, config: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                rng_algorithm: seirpinn::rng::ALGORITHM.to_string(),
                config: config.clone(),
                timings_ms: BTreeMap::new(),
                files: Vec::new(),
                results: serde_json::Value::Null,
            },
            stage_started: None,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn start_stage(&mut self, name: &str) {
        self.finish_stage();
        self.stage_started = Some((name.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((name, t0)) = self.stage_started.take() {
            self.manifest.timings_ms.insert(name, t0.elapsed().as_millis());
        }
    }

    /// Write one output file and record it in the inventory.
    pub fn write_file(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.manifest.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    pub fn set_results(&mut self, results: serde_json::Value) {
        self.manifest.results = results;
    }

    /// Finish the run: write `manifest.json` via a temp file + rename.
    pub fn finalize(mut self) -> Result<(), CliError> {
        self.finish_stage();
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Validation(format!("manifest serialization: {e}")))?;
        let tmp = self.dir.join("manifest.json.tmp");
        let dst = self.dir.join("manifest.json");
        std::fs::write(&tmp, &text)?;
        std::fs::rename(&tmp, &dst)?;
        Ok(())
    }
}
