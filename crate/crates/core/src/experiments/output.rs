//! CSV tables, SVG emission and run manifests.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::plot::Figure;
use super::{Command, ExperimentError, RunOptions, RunSummary, VERSION};

/// Formats a value with 17 significant digits, enough to round-trip any
/// `f64`. Non-finite values are written as `NaN`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// One CSV file: fixed header, string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Rows whose computation failed.
    pub sentinel_rows: usize,
}

impl Table {
    pub fn new(file: String, header: &[&'static str]) -> Self {
        Self {
            file,
            header: header.to_vec(),
            rows: Vec::new(),
            sentinel_rows: 0,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// RFC 4180 text with LF line endings.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }
}

/// Tables and figure produced by one experiment.
#[derive(Debug, Clone)]
pub struct RunTables {
    pub tables: Vec<Table>,
    pub figure: Figure,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    config: &'a ExperimentConfig,
    seed: Option<u64>,
    rows: usize,
    sentinel_rows: usize,
    outputs: Vec<String>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    fs::write(path, bytes).map_err(|e| ExperimentError::io(path, e))
}

pub(crate) fn write_run(
    command: Command,
    config: &ExperimentConfig,
    run: &RunTables,
    options: &RunOptions,
) -> Result<RunSummary, ExperimentError> {
    let dir = &options.out_dir;
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let mut outputs = Vec::new();
    for table in &run.tables {
        let path = dir.join(&table.file);
        write_file(&path, &table.to_csv())?;
        outputs.push(path);
    }
    if options.plot {
        let path = dir.join(config.svg_name());
        write_file(&path, run.figure.to_svg().as_bytes())?;
        outputs.push(path);
    }
    let rows = run.tables.first().map_or(0, |t| t.rows.len());
    let sentinel_rows = run.tables.iter().map(|t| t.sentinel_rows).sum();
    let manifest = Manifest {
        tool: "dimerchain",
        version: VERSION,
        command,
        config,
        seed: config.disorder.as_ref().map(|d| d.seed),
        rows,
        sentinel_rows,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
    };
    let path = dir.join(config.manifest_name());
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    outputs.push(path);
    Ok(RunSummary {
        rows,
        sentinel_rows,
        outputs,
    })
}
