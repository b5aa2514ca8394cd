//! Report and data files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use germlens::Verdict;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;

/// Everything a run produces apart from the wall-clock time.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub subcommand: Command,
    pub config: ExperimentConfig,
    /// Library operations the run went through.
    pub operations: Vec<&'static str>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    pub notes: Vec<String>,
    pub result: Value,
}

/// Plot-ready rows; every cell is already formatted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Report serialized with a trailing `timestamp` field, the only part
/// that differs between identical runs.
pub fn report_json(report: &Report, timestamp: Option<u64>) -> Result<String> {
    let mut v = serde_json::to_value(report)?;
    if let (Some(t), Value::Object(map)) = (timestamp, &mut v) {
        map.insert("timestamp".into(), Value::from(t));
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Writes `<out>/<subcommand>.json` and `<out>/<subcommand>.csv`.
pub fn write(out: &Path, report: &Report, table: &Table) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out)?;
    let stem = report.subcommand.name();
    let json = out.join(format!("{stem}.json"));
    fs::write(&json, report_json(report, Some(now()))?)?;
    let csv_path = out.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok((json, csv_path))
}
