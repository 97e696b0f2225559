//! Result tables, CSV files and run manifests.
//!
//! CSV files carry a header row and every value in `{:.16e}` form
//! (17 significant digits), which parses back to the identical `f64`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CqedError, Result};

/// Named, equal-length numeric columns plus free-form metadata.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<(String, Vec<f64>)>,
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if !self.columns.is_empty() && values.len() != self.rows() {
            return Err(CqedError::DimensionMismatch {
                left: self.rows(),
                right: values.len(),
            });
        }
        if self.column(&name).is_some() {
            return Err(CqedError::param("column", format!("duplicate column `{name}`")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.columns.iter().map(|(n, _)| n.as_str()))?;
        for row in 0..self.rows() {
            w.write_record(self.columns.iter().map(|(_, v)| format_value(v[row])))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses a table written by [`ResultTable::write_csv`] (metadata is not
    /// part of the CSV).
    pub fn read_csv<R: Read>(reader: R) -> io::Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut columns: Vec<(String, Vec<f64>)> =
            headers.into_iter().map(|h| (h, Vec::new())).collect();
        for record in r.records() {
            let record = record?;
            for (col, field) in columns.iter_mut().zip(record.iter()) {
                let v = field.parse::<f64>().map_err(|e| {
                    io::Error::new(io::ErrorKind::InvalidData, format!("bad value `{field}`: {e}"))
                })?;
                col.1.push(v);
            }
        }
        Ok(Self {
            columns,
            metadata: Vec::new(),
        })
    }
}

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One file produced by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
    pub metadata: Vec<(String, String)>,
}

/// Written last, after every output has been written successfully.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub rng_algorithm: String,
    pub command: String,
    pub seed: u64,
    pub ideal: bool,
    pub config: serde_json::Value,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub outputs: Vec<OutputEntry>,
}

/// Writes `bytes` to `path` via a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Writes the table as `<dir>/<name>.csv` and returns its manifest entry.
pub fn write_table(dir: &Path, name: &str, table: &ResultTable) -> io::Result<OutputEntry> {
    let file = format!("{name}.csv");
    let csv = table.to_csv_string();
    write_atomic(&dir.join(&file), csv.as_bytes())?;
    Ok(OutputEntry {
        file,
        sha256: sha256_hex(csv.as_bytes()),
        rows: table.rows(),
        metadata: table.metadata.clone(),
    })
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> io::Result<()> {
    let json = serde_json::to_vec_pretty(manifest)
        .map_err(io::Error::other)?;
    write_atomic(&dir.join("manifest.json"), &json)
}
