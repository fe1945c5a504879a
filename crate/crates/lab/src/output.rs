//! CSV tables with `#` metadata lines, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    /// Floats use 17 significant digits so values round-trip exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub metadata: Vec<(String, String)>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            file_name: file_name.into(),
            metadata: Vec::new(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> LabResult<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| LabError::io(&self.file_name, e);
        w.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| LabError::io(&self.file_name, e.error()))
    }

    /// Column `name` as floats; `None` if absent or not numeric.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        self.rows
            .iter()
            .map(|r| match &r[idx] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub rows: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_table(dir: &Path, table: &Table) -> LabResult<FileRecord> {
    let bytes = table.to_bytes()?;
    let path = dir.join(&table.file_name);
    fs::write(&path, &bytes).map_err(|e| LabError::io(&path, e))?;
    Ok(FileRecord {
        path: PathBuf::from(&table.file_name),
        rows: table.rows.len(),
        sha256: sha256_hex(&bytes),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub software: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<FileRecord>,
    pub statistics: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn file_name(&self) -> String {
        format!("{}_manifest.json", self.config.figure_id)
    }

    pub fn write(&self, dir: &Path) -> LabResult<PathBuf> {
        let path = dir.join(self.file_name());
        let mut text = serde_json::to_string_pretty(self).map_err(|e| LabError::io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
        Ok(path)
    }
}
