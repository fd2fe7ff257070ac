//! Report envelope, CSV tables and plot-data files.
//!
//! Floats are written with 17 significant digits in CSV and plot files;
//! JSON numbers use the shortest representation that round-trips, so both
//! carry the exact binary value. Non-finite values become `null` in JSON
//! and `nan`, `inf`, `-inf` in text files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Common, Format};
use crate::LabError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_f64(*v),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// A two-column curve written to `plot_<name>.dat`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub name: String,
    pub columns: [&'static str; 2],
    pub points: Vec<(f64, f64)>,
}

/// What a command produces before it is written out.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub input: Value,
    pub result: Value,
    pub table: Table,
    pub plots: Vec<Plot>,
    pub warnings: Vec<String>,
    /// Per-row wall times, written to `timing.csv` when present.
    pub row_timing: Option<Table>,
    /// Set when some rows failed but the run continued.
    pub partial: bool,
}

impl CommandOutput {
    pub fn new(input: Value, result: Value, table: Table) -> Self {
        CommandOutput {
            input,
            result,
            table,
            plots: Vec::new(),
            warnings: Vec::new(),
            row_timing: None,
            partial: false,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    command: &'a str,
    seed: u64,
    status: &'static str,
    input: &'a Value,
    result: &'a Value,
    warnings: &'a [String],
}

/// The `report.json` document.
pub fn report_json(command: &str, common: &Common, out: &CommandOutput) -> Value {
    serde_json::to_value(Envelope {
        tool: "cylab",
        version: env!("CARGO_PKG_VERSION"),
        library_version: cylfock::VERSION,
        command,
        seed: common.seed,
        status: if out.partial { "partial" } else { "ok" },
        input: &out.input,
        result: &out.result,
        warnings: &out.warnings,
    })
    .expect("report is serializable")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, table: &Table) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(&table.header).map_err(|e| io_err(path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), LabError> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

/// Writes every output file into `common.out`.
pub fn write_all(
    command: &str,
    common: &Common,
    out: &CommandOutput,
    wall_ms: u128,
    threads: usize,
) -> Result<(), LabError> {
    let dir = &common.out;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    if matches!(common.format, Format::Json | Format::Both) {
        let doc = report_json(command, common, out);
        let text = serde_json::to_string_pretty(&doc).expect("report is serializable") + "\n";
        write_text(&dir.join("report.json"), &text)?;
    }
    if matches!(common.format, Format::Csv | Format::Both) {
        write_csv(&dir.join("table.csv"), &out.table)?;
    }
    for p in &out.plots {
        let mut text = format!("# {} {}\n", p.columns[0], p.columns[1]);
        for (x, y) in &p.points {
            text.push_str(&format!("{} {}\n", fmt_f64(*x), fmt_f64(*y)));
        }
        write_text(&dir.join(format!("plot_{}.dat", p.name)), &text)?;
    }
    let timing = serde_json::json!({
        "command": command,
        "wall_ms": wall_ms as u64,
        "threads": threads,
    });
    write_text(
        &dir.join("timing.json"),
        &(serde_json::to_string_pretty(&timing).expect("timing is serializable") + "\n"),
    )?;
    if let Some(t) = &out.row_timing {
        write_csv(&dir.join("timing.csv"), t)?;
    }
    Ok(())
}
