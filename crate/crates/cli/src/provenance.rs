//! Artifact bookkeeping: every file carries the config hash, and
//! `provenance.json` lists the config and the digest of every artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{config_hash, sha256_hex, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};

pub const PROVENANCE_FILE: &str = "provenance.json";

pub fn code_version() -> String {
    format!("collapse-cli {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub code_version: String,
    pub command: String,
    pub config: Value,
    pub config_sha256: String,
    pub artifacts: BTreeMap<String, String>,
}

pub struct OutputSet {
    dir: PathBuf,
    command: &'static str,
    config: Value,
    hash: String,
    artifacts: BTreeMap<String, String>,
}

impl OutputSet {
    pub fn new(dir: PathBuf, command: &'static str, config: Value) -> Self {
        let hash = config_hash(&config);
        OutputSet {
            dir,
            command,
            config,
            hash,
            artifacts: BTreeMap::new(),
        }
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Comment line embedded in CSV and SVG outputs.
    pub fn hash_comment(&self) -> String {
        format!("config_sha256: {}", self.hash)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.artifacts.insert(name.to_owned(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self) -> CliResult<PathBuf> {
        let prov = Provenance {
            schema_version: SCHEMA_VERSION,
            code_version: code_version(),
            command: self.command.to_owned(),
            config: self.config,
            config_sha256: self.hash,
            artifacts: self.artifacts,
        };
        let mut text = serde_json::to_string_pretty(&prov).expect("provenance serializes");
        text.push('\n');
        let path = self.dir.join(PROVENANCE_FILE);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Checks the config hash and each artifact; returns a one-line summary.
pub fn verify(dir: &Path) -> CliResult<String> {
    let path = dir.join(PROVENANCE_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let prov: Provenance = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: malformed provenance: {e}", path.display())))?;
    let mut problems = Vec::new();
    let recomputed = config_hash(&prov.config);
    if recomputed != prov.config_sha256 {
        problems.push(format!(
            "config hash mismatch: recorded {}, recomputed {recomputed}",
            prov.config_sha256
        ));
    }
    for (name, digest) in &prov.artifacts {
        let p = dir.join(name);
        match std::fs::read(&p) {
            Err(e) => problems.push(format!("{name}: {e}")),
            Ok(bytes) => {
                if &sha256_hex(&bytes) != digest {
                    problems.push(format!("{name}: content digest mismatch"));
                }
                if !String::from_utf8_lossy(&bytes).contains(&prov.config_sha256) {
                    problems.push(format!("{name}: does not embed the config hash"));
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(format!(
            "verified {} artifacts, config_sha256 {}",
            prov.artifacts.len(),
            prov.config_sha256
        ))
    } else {
        Err(CliError::Mismatch(problems.join("\n")))
    }
}
