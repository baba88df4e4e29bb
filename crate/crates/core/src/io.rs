//! CSV ingestion, run configuration and the JSON report envelope.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Interval, Weighting};
use crate::montecarlo::{SimulationPlan, ValidationReport};
use crate::sample::{EmpiricalDistribution, PairedSample};
use crate::two_phase::Coupling;

pub const SCHEMA_VERSION: &str = "1";

/// What to do with zero or negative incomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonPositivePolicy {
    #[default]
    Reject,
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IncomeData {
    Single(EmpiricalDistribution),
    Paired(PairedSample),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedIncome {
    pub data: IncomeData,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

/// Reads one or two named columns from a headed, comma-separated file.
///
/// Row numbers in errors count data rows from 1, excluding the header.
pub fn parse_income_csv(
    path: &Path,
    columns: &[&str],
    policy: NonPositivePolicy,
) -> Result<ParsedIncome> {
    if columns.is_empty() || columns.len() > 2 {
        return Err(Error::Config(format!(
            "expected one or two columns, got {}",
            columns.len()
        )));
    }
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim() == *c)
                .ok_or_else(|| Error::MissingColumn(c.to_string()))
        })
        .collect::<Result<_>>()?;

    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    let (mut rows_read, mut rows_dropped) = (0, 0);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        rows_read += 1;
        let mut values = Vec::with_capacity(index.len());
        for (&j, &name) in index.iter().zip(columns) {
            let text = record.get(j).unwrap_or("").trim();
            let value: f64 = text.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                text: text.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    text: text.to_string(),
                });
            }
            values.push(value);
        }
        if let Some((k, &value)) = values.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            match policy {
                NonPositivePolicy::Reject => {
                    return Err(Error::NonPositiveRow {
                        row,
                        column: columns[k].to_string(),
                        value,
                    })
                }
                NonPositivePolicy::Drop => {
                    rows_dropped += 1;
                    continue;
                }
            }
        }
        for (col, v) in cols.iter_mut().zip(values) {
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(Error::EmptyAfterFilter);
    }
    let mut warnings = Vec::new();
    if rows_dropped > 0 {
        warnings.push(format!(
            "dropped {rows_dropped} of {rows_read} rows with non-positive income"
        ));
    }
    let data = if cols.len() == 1 {
        IncomeData::Single(EmpiricalDistribution::new(&cols[0])?)
    } else {
        let second = cols.pop().expect("two columns");
        let first = cols.pop().expect("two columns");
        IncomeData::Paired(PairedSample::from_columns(first, second)?)
    };
    Ok(ParsedIncome {
        data,
        rows_read,
        rows_dropped,
        warnings,
    })
}

/// Effective configuration of one run, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub columns: Vec<String>,
    pub poverty_line: Option<f64>,
    pub index: Option<String>,
    pub grid_points: usize,
    pub quadrature: String,
    pub coupling: Coupling,
    pub weighting: Weighting,
    pub level: f64,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub output: Option<PathBuf>,
    pub policy: NonPositivePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationPlan>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            columns: Vec::new(),
            poverty_line: None,
            index: None,
            grid_points: crate::sample::Grid::DEFAULT_POINTS,
            quadrature: "exact".into(),
            coupling: Coupling::Empirical,
            weighting: Weighting::Ecdf,
            level: 0.95,
            seed: None,
            replicates: None,
            output: None,
            policy: NonPositivePolicy::Reject,
            simulation: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level {} must lie in (0, 1)",
                self.level
            )));
        }
        if self.grid_points < 16 {
            return Err(Error::Config(format!(
                "grid needs at least 16 points, got {}",
                self.grid_points
            )));
        }
        if let Some(z) = self.poverty_line {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::Config(format!("poverty line {z} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// The JSON document written by every analysis command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub estimates: BTreeMap<String, f64>,
    pub ledgers: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            schema: SCHEMA_VERSION.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            estimates: BTreeMap::new(),
            ledgers: BTreeMap::new(),
            interval: None,
            validation: None,
            warnings: Vec::new(),
            timing: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
