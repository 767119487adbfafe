//! CSV tables and JSON sidecars.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{AppError, Result};

/// Named columns of equal length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push(name.to_string());
        self.data.push(values);
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|k| self.data[k].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    /// Header, equal column lengths, finite values and, when `time` names a
    /// column, strictly increasing time.
    pub fn check_schema(&self, time: Option<&str>) -> std::result::Result<(), String> {
        if self.columns.is_empty() {
            return Err("no columns".into());
        }
        let mut names = self.columns.clone();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) || self.columns.iter().any(String::is_empty) {
            return Err(format!("bad header {:?}", self.columns));
        }
        let n = self.rows();
        if n == 0 {
            return Err("no rows".into());
        }
        for (name, col) in self.columns.iter().zip(&self.data) {
            if col.len() != n {
                return Err(format!("column `{name}` has {} rows, expected {n}", col.len()));
            }
            if let Some(k) = col.iter().position(|x| !x.is_finite()) {
                return Err(format!("column `{name}` row {k} is not finite"));
            }
        }
        if let Some(t) = time {
            let col = self.column(t).ok_or_else(|| format!("missing time column `{t}`"))?;
            if let Some(k) = col.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(format!("time column not increasing at row {}", k + 1));
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in 0..self.rows() {
            w.write_record(self.data.iter().map(|c| format!("{:.16e}", c[r]))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv_string())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let schema = |detail: String| AppError::Schema { path: path.to_path_buf(), detail };
        let mut r = csv::Reader::from_path(path).map_err(|e| schema(e.to_string()))?;
        let columns: Vec<String> = r.headers().map_err(|e| schema(e.to_string()))?.iter().map(String::from).collect();
        let mut data = vec![Vec::new(); columns.len()];
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| schema(e.to_string()))?;
            for (j, field) in rec.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| schema(format!("row {k}: `{field}` is not a number")))?;
                data[j].push(x);
            }
        }
        Ok(Self { columns, data })
    }
}

/// Reads `path` back and runs [`SeriesTable::check_schema`] on it.
pub fn check_csv(path: &Path, time: Option<&str>) -> Result<SeriesTable> {
    let table = SeriesTable::read_csv(path)?;
    table.check_schema(time).map_err(|detail| AppError::Schema { path: path.to_path_buf(), detail })?;
    Ok(table)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Creates `dir` and confirms it accepts files.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let probe = dir.join(".pulse-jcm-write-check");
    fs::write(&probe, b"").map_err(|e| AppError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| AppError::io(&probe, e))
}
