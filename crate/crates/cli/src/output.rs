//! CSV tables, JSON sidecars and optional gnuplot scripts.

use crate::error::CliError;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

/// 17 significant digits.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_num(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(t) => t.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything a command produces besides the table.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub table: Table,
    pub warnings: Vec<String>,
    /// Free-form lines for stderr (summaries).
    pub notes: Vec<String>,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

pub fn write_outputs(
    report: &Report,
    out: Option<&Path>,
    config: Value,
    started_at: &str,
    wall_seconds: f64,
    plot_script: bool,
) -> Result<(), CliError> {
    let csv = report.table.to_csv();
    match out {
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
        }
        Some(path) => {
            std::fs::write(path, csv)?;
            let meta = json!({
                "config": config,
                "version": hardedge::VERSION,
                "started_at": started_at,
                "wall_seconds": wall_seconds,
                "warnings": report.warnings,
            });
            std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta).expect("json") + "\n")?;
            if plot_script {
                std::fs::write(plot_path(path), gnuplot_script(path, &report.table.header))?;
            }
        }
    }
    Ok(())
}

pub fn plot_path(csv: &Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".gp");
    PathBuf::from(p)
}

/// Plots every numeric column after the first against the first.
fn gnuplot_script(csv: &Path, header: &[String]) -> String {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\nset terminal pngcairo size 900,600\nset output '{}.png'\nplot ",
        header.first().map(String::as_str).unwrap_or("x"),
        name
    );
    let skip = ["route", "count"];
    let cols: Vec<String> = header
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, h)| !skip.contains(&h.as_str()) && !h.ends_with("error"))
        .map(|(i, _)| format!("'{name}' using 1:{} with lines", i + 1))
        .collect();
    s.push_str(&cols.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_num(0.1), "1.0000000000000001e-1");
        assert_eq!(format_num(1.0 / 3.0).replace('.', "").split('e').next().unwrap().len(), 17);
        assert_eq!(format_num(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["s", "value", "route"]);
        t.push(vec![1.0.into(), Cell::Empty, "fredholm".into()]);
        assert_eq!(t.to_csv(), "s,value,route\n1.0000000000000000e0,,fredholm\n");
    }
}
