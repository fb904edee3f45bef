//! Tabular output with the resolved config echoed as metadata.

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Serialize)]
struct JsonDocument {
    tool: String,
    version: String,
    config: RunConfig,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

pub fn write_table(table: &Table, cfg: &RunConfig, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            writeln!(out, "# udw {VERSION}")?;
            writeln!(out, "{CONFIG_PREFIX}{}", serde_json::to_string(cfg)?)?;
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = JsonDocument {
                tool: "udw".into(),
                version: VERSION.into(),
                config: cfg.clone(),
                columns: table.columns.clone(),
                rows: table.rows.clone(),
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Recovers the config echoed into an output file of either format.
pub fn read_config_echo(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)) {
        return RunConfig::from_json(line, &path.display().to_string());
    }
    #[derive(Deserialize)]
    struct Echo {
        config: RunConfig,
    }
    let doc: Echo = serde_json::from_str(&text)
        .map_err(|source| CliError::Parse { path: path.display().to_string(), source })?;
    Ok(doc.config)
}
