//! CSV tables and JSON sidecars, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A CSV cell: floats carry 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.headers).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })
}

/// Metadata accompanying one data file.
#[derive(Debug, Clone)]
pub struct Sidecar {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Map<String, Value>,
    pub wall_time_s: f64,
}

impl Sidecar {
    pub fn to_json(&self, data_file: &str) -> Vec<u8> {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "data_file": data_file,
            "parameters": self.parameters,
            "results": self.results,
            "wall_time_s": self.wall_time_s,
        });
        let mut out = serde_json::to_vec_pretty(&v).expect("json values serialize");
        out.push(b'\n');
        out
    }
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`; returns the CSV path.
pub fn emit(dir: &Path, stem: &str, table: &Table, sidecar: &Sidecar) -> Result<PathBuf> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, &table.to_csv()?)?;
    write_atomic(&dir.join(format!("{stem}.json")), &sidecar.to_json(&format!("{stem}.csv")))?;
    Ok(csv_path)
}
