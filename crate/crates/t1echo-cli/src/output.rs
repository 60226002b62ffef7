//! Artifact writers: atomic (write-temp-then-rename), with the resolved
//! configuration embedded in every file.
//!
//! CSV layout: a single `# config: {...}` comment line, a header row, then
//! newline-terminated data rows. Floats use Rust's shortest round-trip
//! representation with `.` as the decimal separator, so re-running an
//! identical configuration reproduces bit-identical payloads.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

/// Table artifact: named columns plus rows of floats.
#[derive(Serialize)]
pub struct Table {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(config: ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.data.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str("# config: ");
        out.push_str(&serde_json::to_string(&self.config)?);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.data {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path, format: &str) -> Result<()> {
        let body = match format {
            "json" => self.to_json()?,
            _ => self.to_csv()?,
        };
        atomic_write(path, body.as_bytes())
    }
}

/// Write atomically: the target appears complete or not at all; a failed
/// write leaves no partial file behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp: PathBuf = {
        let mut name = path
            .file_name()
            .map(|n| n.to_os_string())
            .unwrap_or_else(|| ".output".into());
        name.push(format!(".tmp.{}", std::process::id()));
        path.with_file_name(name)
    };
    let result = std::fs::write(&tmp, bytes)
        .with_context(|| format!("cannot write {}", tmp.display()))
        .and_then(|()| {
            std::fs::rename(&tmp, path)
                .with_context(|| format!("cannot move output into place at {}", path.display()))
        });
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Serialize any JSON-able artifact atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    atomic_write(path, body.as_bytes())
}
