//! Result tables on disk: CSV for plotting tools, JSON with the full manifest.
//!
//! CSV layout:
//!
//! ```text
//! # units: rad/s,1,1/s
//! # reference: threshold_rabi = 1e9 rad/s
//! two_photon_detuning,excited_population,fluorescence
//! -2e9,1.25e-3,1.25e9
//! ```
//!
//! Cells use Rust's shortest round-trip `{:e}` notation, so reading a file
//! back recovers every value bit for bit and identical tables give identical
//! bytes.

use std::io::Write;
use std::path::Path;

use cnt_coherence::scenario::{Column, Reference, ScanTable};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Format;

/// JSON schema of the files written by [`write_results`] in JSON format.
pub const RESULT_SCHEMA: &str = include_str!("../schemas/scan_table.schema.json");

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("malformed JSON result: {0}")]
    Json(#[from] serde_json::Error),
}

/// A result table with its provenance. Scenario runs carry their
/// [`cnt_coherence::scenario::Manifest`]; raw solver runs carry the resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub references: Vec<Reference>,
    pub manifest: serde_json::Value,
}

impl From<&ScanTable> for ResultTable {
    fn from(t: &ScanTable) -> Self {
        ResultTable {
            columns: t.columns.clone(),
            rows: t.rows.clone(),
            references: t.references.clone(),
            manifest: serde_json::to_value(&t.manifest).expect("manifest is plain data"),
        }
    }
}

pub fn to_csv(t: &ResultTable) -> String {
    let mut s = String::new();
    let units: Vec<&str> = t.columns.iter().map(|c| c.unit.as_str()).collect();
    s.push_str(&format!("# units: {}\n", units.join(",")));
    for r in &t.references {
        s.push_str(&format!("# reference: {} = {:e} {}\n", r.name, r.value, r.unit));
    }
    let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
    s.push_str(&names.join(","));
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Reads a CSV written by [`to_csv`]. The manifest is not part of CSV and comes back as null.
pub fn from_csv(text: &str) -> Result<ResultTable, OutputError> {
    let bad = |line: usize, message: String| OutputError::Csv {
        line: line + 1,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| bad(0, "empty file".into()))?;
    let units: Vec<String> = first
        .strip_prefix("# units: ")
        .ok_or_else(|| bad(0, "expected '# units:' line".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut references = Vec::new();
    let mut header = None;
    for (n, line) in lines.by_ref() {
        if let Some(r) = line.strip_prefix("# reference: ") {
            let (name, rest) = r
                .split_once(" = ")
                .ok_or_else(|| bad(n, "reference without '='".into()))?;
            let (value, unit) = rest
                .split_once(' ')
                .ok_or_else(|| bad(n, "reference without unit".into()))?;
            references.push(Reference {
                name: name.to_string(),
                value: value
                    .parse()
                    .map_err(|_| bad(n, format!("malformed number '{value}'")))?,
                unit: unit.to_string(),
            });
        } else {
            header = Some(line);
            break;
        }
    }
    let header = header.ok_or_else(|| bad(text.lines().count(), "missing header".into()))?;
    let columns: Vec<Column> = header
        .split(',')
        .zip(&units)
        .map(|(name, unit)| Column::new(name, unit))
        .collect();
    if columns.len() != units.len() || header.split(',').count() != units.len() {
        return Err(bad(0, "units and header have different lengths".into()));
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|_| bad(n, format!("malformed number '{c}'"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != columns.len() {
            return Err(bad(n, format!("{} cells, expected {}", row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok(ResultTable {
        columns,
        rows,
        references,
        manifest: serde_json::Value::Null,
    })
}

pub fn to_json(t: &ResultTable) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("tables are plain data");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<ResultTable, OutputError> {
    Ok(serde_json::from_str(text)?)
}

pub fn render(t: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => to_csv(t),
        Format::Json => to_json(t),
    }
}

/// Writes `t` to `path` through a temporary file in the same directory, so
/// readers never see a partial file.
pub fn write_results(t: &ResultTable, format: Format, path: &Path) -> Result<(), OutputError> {
    let fail = |source| OutputError::Write {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(render(t, format).as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
