//! Run manifests and all-or-nothing output writing.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use foldcons::config::Settings;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Everything needed to repeat a run. The timestamp is the only field that
/// changes between identical runs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub config: Settings,
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub corpus_sha256: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_owned(),
            argv: std::env::args().collect(),
            config: Settings::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            corpus_sha256: None,
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push((path.to_path_buf(), sha256_hex(bytes)));
    }

    pub fn to_json(&self) -> Value {
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.to_owned(), json!(v)))
            .collect();
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        json!({
            "subcommand": self.subcommand,
            "version": env!("CARGO_PKG_VERSION"),
            "argv": self.argv,
            "config": config,
            "inputs": self
                .inputs
                .iter()
                .map(|(p, h)| json!({ "path": p.display().to_string(), "sha256": h }))
                .collect::<Vec<_>>(),
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "seed": self.seed,
            "corpus_sha256": self.corpus_sha256,
            "created_unix": created,
        })
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Collects output files and commits them together. Nothing appears at the
/// destination paths until every file has been written to a temporary file
/// next to it.
#[derive(Default)]
pub struct Outputs {
    pending: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.pending.push((path.into(), contents.into()));
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        self.pending.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn commit(self) -> Result<()> {
        let mut staged = Vec::with_capacity(self.pending.len());
        for (path, bytes) in &self.pending {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut tmp = NamedTempFile::new_in(&dir)
                .with_context(|| format!("staging {}", path.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
