//! Artifact writing: one file per table, `report.json` and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::scenarios::{Assertion, Outcome, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub seed_lineage: String,
    /// Resolved parameters, defaults included.
    pub params: Value,
    pub threads: usize,
    pub format: Format,
    pub out_dir: String,
    pub version: String,
}

#[derive(Serialize)]
struct Report<'a> {
    scenario: &'a str,
    seed: u64,
    passed: bool,
    hard_failures: usize,
    assertions: &'a [Assertion],
    summary: &'a serde_json::Map<String, Value>,
}

fn write_table(dir: &Path, format: Format, table: &Table) -> Result<PathBuf, CliError> {
    match format {
        Format::Csv => {
            let path = dir.join(format!("{}.csv", table.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|c| c.render()))?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{}.json", table.name));
            let records: Vec<serde_json::Map<String, Value>> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.clone(), serde_json::to_value(c).unwrap_or(Value::Null)))
                        .collect()
                })
                .collect();
            write_json(&path, &records)?;
            Ok(path)
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes all artifacts of a run into `dir` and returns their paths.
pub fn write_artifacts(dir: &Path, manifest: &Manifest, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for table in &outcome.tables {
        written.push(write_table(dir, manifest.format, table)?);
    }
    let report = Report {
        scenario: &manifest.scenario,
        seed: manifest.seed,
        passed: outcome.hard_failures() == 0,
        hard_failures: outcome.hard_failures(),
        assertions: &outcome.assertions,
        summary: &outcome.summary,
    };
    let report_path = dir.join("report.json");
    write_json(&report_path, &report)?;
    written.push(report_path);
    let manifest_path = dir.join("manifest.json");
    write_json(&manifest_path, manifest)?;
    written.push(manifest_path);
    Ok(written)
}
