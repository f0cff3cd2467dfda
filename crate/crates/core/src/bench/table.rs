use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Format, Quantity, RunConfig};
use crate::error::Result;
use crate::metrics::ErrorReport;

/// Scientific notation with 6 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.5e}")
}

#[derive(Debug, Clone)]
pub struct TableResult {
    pub config: RunConfig,
    /// `cells[row][column]`, rows in sweep order.
    pub cells: Vec<Vec<std::result::Result<ErrorReport, String>>>,
}

#[derive(Serialize)]
struct JsonCell<'a> {
    row: String,
    function: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

impl TableResult {
    /// The selected quantity of a cell, or the failure message.
    pub fn value(&self, row: usize, col: usize) -> std::result::Result<f64, String> {
        let r = self.cells[row][col].as_ref().map_err(Clone::clone)?;
        let v = match self.config.quantity {
            Quantity::Epsilon1 => r.epsilon1,
            Quantity::Epsilon2 => r.epsilon2,
        };
        v.ok_or_else(|| "quantity not computed".to_owned())
    }

    /// Value of the cell in the row for sweep value `param` and column `id`.
    pub fn lookup(&self, param: usize, id: &str) -> Option<std::result::Result<f64, String>> {
        let r = self.config.sweep.iter().position(|&p| p == param)?;
        let c = self.config.columns.iter().position(|c| c.id == id)?;
        Some(self.value(r, c))
    }

    pub fn has_errors(&self) -> bool {
        self.cells.iter().flatten().any(|c| c.is_err())
    }

    pub fn reports(&self) -> impl Iterator<Item = &ErrorReport> {
        self.cells.iter().flatten().filter_map(|c| c.as_ref().ok())
    }

    fn cell_text(&self, row: usize, col: usize) -> String {
        match self.value(row, col) {
            Ok(v) => format_value(v),
            Err(e) => format!("NA:{e}"),
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec![self.config.row_header.clone()];
        h.extend(self.config.columns.iter().map(|c| c.id.clone()));
        h
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.config
            .sweep
            .iter()
            .enumerate()
            .map(|(r, &p)| {
                let mut row = vec![self.config.row_name(p)];
                row.extend((0..self.config.columns.len()).map(|c| self.cell_text(r, c)));
                row
            })
            .collect()
    }

    /// Header of function ids, one row per sweep value.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for row in self.body() {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | ").replace('\n', " "));
        let header = self.header();
        out.push_str(&line(&header));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        for row in self.body() {
            out.push_str(&line(&row));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut cells = Vec::new();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                cells.push(JsonCell {
                    row: self.config.row_name(self.config.sweep[r]),
                    function: &self.config.columns[c].id,
                    report: cell.as_ref().ok(),
                    error: cell.as_ref().err().map(String::as_str),
                });
            }
        }
        Ok(serde_json::to_string_pretty(&cells)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Md => Ok(self.to_markdown()),
            Format::Json => self.to_json(),
        }
    }

    /// Writes `<name>.<ext>` into `dir` for each format.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(formats.len());
        for &f in formats {
            let path = dir.join(format!("{}.{}", self.config.name, f.extension()));
            std::fs::write(&path, self.render(f)?)?;
            paths.push(path);
        }
        Ok(paths)
    }
}
