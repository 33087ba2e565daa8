//! Deterministic CSV and JSON artifacts.
//!
//! CSV files start with a `#` line naming every column. Floats are printed
//! with 17 significant digits so that files round-trip exactly. JSON objects
//! go through `serde_json::Value`, whose maps are sorted by key.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use charmat_core::{CMat, Tolerances, C64};
use serde_json::{json, Value};

use crate::error::CliError;

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix(m: &CMat) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn tolerances(tol: &Tolerances) -> Value {
    Value::Object(tol.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

/// `name_re_j_k, name_im_j_k` for every entry, row-major.
pub fn matrix_columns(name: &str, rows: usize, cols: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * rows * cols);
    for j in 0..rows {
        for k in 0..cols {
            out.push(format!("{name}_re_{j}_{k}"));
            out.push(format!("{name}_im_{j}_{k}"));
        }
    }
    out
}

pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// CSV body with a commented header line.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[String]) -> Self {
        Self { text: format!("# {}\n", columns.join(",")) }
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let line: Vec<String> = fields.into_iter().collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

pub fn matrix_fields(m: &CMat) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * m.len());
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            out.push(num(m[(j, k)].re));
            out.push(num(m[(j, k)].im));
        }
    }
    out
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io { path: root.display().to_string(), source: e })?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
