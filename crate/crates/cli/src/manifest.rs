//! Run manifest: what went in, what came out, how long each stage took.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub created_unix: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub out_dir: String,
    pub outputs: Vec<String>,
    pub timings: Vec<StageTiming>,
    pub status: &'static str,
    pub error: Option<StageError>,
}

pub fn sha256_file(path: &Path) -> Result<InputDigest> {
    let mut file =
        fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

/// One subcommand invocation. Tracks the active stage so a failure can be
/// tagged with it, and every file written so the manifest lists them all.
pub struct Run {
    pub out: PathBuf,
    manifest: RunManifest,
    stage: String,
}

impl Run {
    pub fn new(subcommand: &str, out: &Path) -> Run {
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Run {
            out: out.to_path_buf(),
            manifest: RunManifest {
                tool: "repcite",
                version: env!("CARGO_PKG_VERSION"),
                subcommand: subcommand.to_owned(),
                created_unix,
                config: serde_json::Value::Null,
                inputs: Vec::new(),
                out_dir: out.display().to_string(),
                outputs: Vec::new(),
                timings: Vec::new(),
                status: "running",
                error: None,
            },
            stage: "setup".to_owned(),
        }
    }

    pub fn set_config(&mut self, config: serde_json::Value) {
        self.manifest.config = config;
    }

    /// Digest every input before anything reads it.
    pub fn record_inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
        self.stage("digest", |run| {
            for p in paths {
                let d = sha256_file(p)?;
                run.manifest.inputs.push(d);
            }
            Ok(())
        })
    }

    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Run) -> Result<T>) -> Result<T> {
        self.stage = name.to_owned();
        let start = Instant::now();
        let out = f(self)?;
        self.manifest.timings.push(StageTiming {
            stage: name.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    pub fn current_stage(&self) -> &str {
        &self.stage
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.note_output(rel);
        Ok(())
    }

    /// Register a file some other writer already placed under `out`.
    pub fn note_output(&mut self, rel: &str) {
        if !self.manifest.outputs.iter().any(|o| o == rel) {
            self.manifest.outputs.push(rel.to_owned());
        }
    }

    pub fn outputs(&self) -> &[String] {
        &self.manifest.outputs
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Write `manifest.json`; `error` marks the run failed at the active stage.
    pub fn finish(&mut self, error: Option<&anyhow::Error>) -> Result<()> {
        match error {
            None => self.manifest.status = "ok",
            Some(e) => {
                self.manifest.status = "error";
                self.manifest.error = Some(StageError {
                    stage: self.stage.clone(),
                    message: format!("{e:#}"),
                });
            }
        }
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))?;
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        fs::write(self.out.join(MANIFEST_FILE), text)
            .with_context(|| format!("cannot write manifest in {}", self.out.display()))?;
        Ok(())
    }
}
