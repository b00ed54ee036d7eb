use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cosets::FamilyKind;
use crate::error::{CosetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = CosetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(CosetError::Config(format!("unknown format `{other}`, expected csv or json"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

/// Column order of the concentration CSV.
pub const CSV_COLUMNS: [&str; 15] = [
    "family",
    "alpha",
    "k",
    "m",
    "N",
    "epsilon",
    "samples",
    "hits",
    "fraction",
    "ci_low",
    "ci_high",
    "median_dist",
    "mean_dist",
    "seed",
    "runtime_s",
];

/// One `(N, ε)` cell of a concentration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub family: FamilyKind,
    pub alpha: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub hits: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub median_dist: f64,
    pub mean_dist: f64,
    pub seed: u64,
    pub runtime_s: f64,
}

impl ReportRow {
    /// Binomial standard error of `fraction`.
    pub fn std_error(&self) -> f64 {
        (self.fraction * (1.0 - self.fraction) / self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rows: Vec<ReportRow>,
}

impl ConcentrationReport {
    pub fn row(&self, n: usize, epsilon: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n && r.epsilon == epsilon)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => to_json(self),
            ReportFormat::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                w.write_record(CSV_COLUMNS).map_err(csv_error)?;
                for row in &self.rows {
                    w.serialize(row).map_err(csv_error)?;
                }
                finish_csv(w)
            }
        }
    }
}

/// Per-`N` statistics of `‖u‖` for the top `k×k` block `u` of a Haar orthogonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecayRow {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub median_norm: f64,
    pub mean_norm: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockDecayReport {
    pub rows: Vec<BlockDecayRow>,
}

impl BlockDecayReport {
    pub fn row(&self, n: usize) -> Option<&BlockDecayRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => to_json(self),
            ReportFormat::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                w.write_record(["k", "N", "samples", "median_norm", "mean_norm", "seed"])
                    .map_err(csv_error)?;
                for row in &self.rows {
                    w.serialize(row).map_err(csv_error)?;
                }
                finish_csv(w)
            }
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CosetError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_error(e: csv::Error) -> CosetError {
    CosetError::Config(format!("csv encoding failed: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CosetError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report` to `path`.
pub fn write_report(report: &ConcentrationReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = report.render(format)?;
    std::fs::write(path, text).map_err(|source| CosetError::Io {
        path: path.to_path_buf(),
        source,
    })
}
