//! Run manifests, digests, and output plumbing shared by all subcommands.
//!
//! Every document embeds a [`RunManifest`] so a run can be reproduced from
//! its own output: the command, the fully resolved configuration (defaults
//! materialized), the seed, the tool version, and digests of any input
//! files. Nothing time-dependent is serialized — identical invocations
//! produce byte-identical output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// Resolved configuration: flag values after applying `--config` and
    /// defaults, keyed by flag name.
    pub config: serde_json::Value,
    /// SHA-256 of every input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            input_digests: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = fs::read(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.input_digests
            .insert(path.display().to_string(), hex_digest(&bytes));
        Ok(())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    /// Structured JSON document with the manifest embedded.
    Report,
    /// Flat CSV of the per-point data.
    Csv,
}

/// Write `text` to `--out` or stdout.
pub fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

pub fn emit_json<T: Serialize>(out: Option<&PathBuf>, doc: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    emit(out, &text)
}

/// Minimal CSV writer: header plus rows of already-formatted cells.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// Deterministic shortest-roundtrip float formatting for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}
