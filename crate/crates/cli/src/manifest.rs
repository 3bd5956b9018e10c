//! Run manifests and the output directory writer.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

/// Writes files atomically into one directory and remembers each one.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::other(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.write_at(name, bytes, None)
    }

    /// Like [`OutputDir::write`], tagging the file with a simulation time.
    pub fn write_at(&mut self, name: &str, bytes: &[u8], time: Option<f64>) -> Result<(), CliError> {
        netkernel::io::write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
            time,
        });
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub command_line: Vec<String>,
    /// SHA-256 of the canonical network text or of the input files.
    pub config_hash: String,
    pub source: String,
    pub parameters: Value,
    pub summary: Value,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputFile>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

/// Collects what a command did and writes `manifest.json` last.
pub struct ManifestBuilder {
    command: &'static str,
    started: Instant,
    started_unix: u64,
    pub config_hash: String,
    pub source: String,
    pub parameters: Value,
    pub summary: Value,
    pub warnings: Vec<String>,
}

impl ManifestBuilder {
    pub fn new(command: &'static str) -> Self {
        ManifestBuilder {
            command,
            started: Instant::now(),
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            config_hash: String::new(),
            source: String::new(),
            parameters: Value::Null,
            summary: Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn finish(self, mut out: OutputDir) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            tool: "netkernel",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            command_line: std::env::args().collect(),
            config_hash: self.config_hash,
            source: self.source,
            parameters: self.parameters,
            summary: self.summary,
            warnings: self.warnings,
            outputs: std::mem::take(&mut out.files),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::other(e.to_string()))?;
        let path = out.dir.join("manifest.json");
        netkernel::io::write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
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

    #[test]
    fn manifest_lists_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("a.csv", b"x\n").unwrap();
        out.write_at("b.grid", b"yz", Some(1.5)).unwrap();
        let path = ManifestBuilder::new("reduce").finish(out).unwrap();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let files: Vec<&str> = v["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| f["file"].as_str().unwrap())
            .collect();
        assert_eq!(files, ["a.csv", "b.grid"]);
        assert_eq!(v["outputs"][1]["time"], 1.5);
        assert_eq!(v["outputs"][0]["sha256"], sha256_hex(b"x\n"));
    }
}
