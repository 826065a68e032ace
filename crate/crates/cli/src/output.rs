//! Artifact directory with per-file checksums and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use seqbelief::export::ExportError;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub paths: usize,
    pub formats: Vec<Format>,
    pub artifacts: BTreeMap<String, Artifact>,
    pub created_unix_secs: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct OutputDir {
    root: PathBuf,
    formats: Vec<Format>,
    artifacts: BTreeMap<String, Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Validation(format!("output directory {}: {e}", root.display())))?;
        let mut formats = formats.to_vec();
        formats.sort();
        formats.dedup();
        Ok(OutputDir {
            root: root.to_path_buf(),
            formats,
            artifacts: BTreeMap::new(),
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Writes `relative` through `fill`, then records its checksum.
    pub fn write<F>(&mut self, relative: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), ExportError>,
    {
        let mut buf = Vec::new();
        fill(&mut buf).map_err(CliError::runtime)?;
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(CliError::runtime)?;
        }
        let mut w = BufWriter::new(fs::File::create(&path).map_err(CliError::runtime)?);
        w.write_all(&buf).and_then(|_| w.flush()).map_err(CliError::runtime)?;
        self.artifacts.insert(
            relative.to_string(),
            Artifact {
                sha256: sha256_hex(&buf),
                bytes: buf.len() as u64,
            },
        );
        Ok(())
    }

    pub fn finish(self, command: &str, config_text: &str, seed: u64, paths: usize) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            paths,
            formats: self.formats,
            artifacts: self.artifacts,
            created_unix_secs: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(CliError::runtime)?;
        fs::write(self.root.join("manifest.json"), text + "\n").map_err(CliError::runtime)?;
        Ok(manifest)
    }
}
