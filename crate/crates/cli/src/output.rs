use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::SCHEMA_VERSION;

/// Relative output paths are resolved against this directory when set.
pub const OUT_DIR_ENV: &str = "TURNOVER_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    /// Arguments after the program name, enough to replay the run.
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<OutputRecord>,
}

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

/// Collects the files a command writes, then the manifest describing them.
pub struct Session {
    command: &'static str,
    args: Vec<String>,
    config: serde_json::Value,
    seed: Option<u64>,
    started: u128,
    outputs: Vec<OutputRecord>,
}

impl Session {
    pub fn new(command: &'static str, args: Vec<String>, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            command,
            args,
            config: serde_json::to_value(config)?,
            seed,
            started: now_ms(),
            outputs: Vec::new(),
        })
    }

    /// Writes `bytes` to `dest`, or to stdout when `dest` is `None`.
    pub fn emit(&mut self, dest: Option<&Path>, bytes: &[u8]) -> Result<()> {
        match dest {
            Some(p) => {
                let path = resolve(p);
                create_parent(&path)?;
                fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
                self.record(path, bytes);
            }
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
        }
        Ok(())
    }

    /// Registers a file that was written directly.
    pub fn record_file(&mut self, path: PathBuf) -> Result<()> {
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        self.record(path, &bytes);
        Ok(())
    }

    fn record(&mut self, path: PathBuf, bytes: &[u8]) {
        self.outputs.push(OutputRecord {
            path,
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    /// Writes `<primary>.manifest.json`, falling back to the first file
    /// written. Nothing is written when every output went to stdout.
    pub fn finish(self, primary: Option<&Path>) -> Result<Option<RunManifest>> {
        let base = match (primary, self.outputs.first()) {
            (Some(p), _) => resolve(p),
            (None, Some(first)) => first.path.clone(),
            (None, None) => return Ok(None),
        };
        let mut name = base.into_os_string();
        name.push(".manifest.json");
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            command: self.command.to_string(),
            args: self.args,
            config: self.config,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&name, text).with_context(|| format!("writing {}", Path::new(&name).display()))?;
        Ok(Some(manifest))
    }
}

pub fn to_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
