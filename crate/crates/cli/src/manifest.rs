//! Output directory bookkeeping: every written file is checksummed and listed
//! in `manifest.json`, which is written last, also when a run fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: serde_json::Value,
    pub timings: Vec<Timing>,
    pub files: Vec<FileEntry>,
}

/// Collects artifacts of one invocation.
pub struct Session {
    dir: PathBuf,
    command: String,
    pub config: serde_json::Value,
    timings: Vec<Timing>,
    files: Vec<FileEntry>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Session {
    pub fn new(dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config: serde_json::Value::Null,
            timings: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn timed<T>(&mut self, phase: &str, work: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = work();
        self.timings.push(Timing {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes the manifest; `error` marks a failed run.
    pub fn finish(self, error: Option<String>) -> Result<PathBuf> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            status: if error.is_none() { "ok" } else { "failed" },
            error,
            config: self.config,
            timings: self.timings,
            files: self.files,
        };
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
