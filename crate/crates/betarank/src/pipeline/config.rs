//! Run configuration: the documented key set of the TOML config file.

use crate::covariates::{CovariateFileSpec, MarginalizationEncoding};
use crate::error::{Error, Result};
use crate::fitting::FitSpace;
use crate::od_network::{ColumnMapping, RowErrorPolicy, SelfLoopPolicy};
use crate::regimes::ModeMethod;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable that overrides `output_dir` (the only override).
pub const OUTPUT_DIR_ENV: &str = "BETARANK_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacationPeriod {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

/// Everything a batch run needs. Deserialized from TOML; all fields except
/// the two directories and the filename pattern have defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Directory of daily edgelist files.
    pub input_dir: PathBuf,
    /// chrono date format the filenames follow, e.g. `%Y-%m-%d.csv`.
    pub filename_pattern: String,
    pub output_dir: PathBuf,

    #[serde(default)]
    pub edgelist: ColumnMapping,
    #[serde(default)]
    pub row_errors: RowErrorPolicy,
    #[serde(default)]
    pub fit_space: FitSpace,
    #[serde(default)]
    pub mode_method: ModeMethod,
    #[serde(default)]
    pub self_loops: SelfLoopPolicy,

    /// Worker threads for per-day analysis; 0 means one per core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,

    /// Persistent-discordance threshold in days.
    #[serde(default = "default_concordance_threshold")]
    pub concordance_threshold_days: u32,
    #[serde(default = "default_hub_top_k")]
    pub hub_top_k: usize,

    /// Marker dates echoed into outputs; no computation branches on them.
    #[serde(default)]
    pub event_dates: Vec<NaiveDate>,
    #[serde(default)]
    pub vacation_period: Option<VacationPeriod>,

    /// (before, after) date pairs for switching reports.
    #[serde(default)]
    pub switching_pairs: Vec<(NaiveDate, NaiveDate)>,
    /// Dates on which association tests run (requires covariates).
    #[serde(default)]
    pub association_dates: Vec<NaiveDate>,

    #[serde(default)]
    pub covariates: Vec<CovariateFileSpec>,
    /// Planar coordinates of the city reference point, meters.
    #[serde(default)]
    pub reference_point: Option<(f64, f64)>,
    #[serde(default)]
    pub marginalization_encoding: MarginalizationEncoding,
}

fn default_concordance_threshold() -> u32 {
    200
}

fn default_hub_top_k() -> usize {
    20
}

impl RunConfig {
    /// Parse a TOML config file, apply the output-dir environment override,
    /// and validate what can be validated before the run starts.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                config.output_dir = PathBuf::from(dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.input_dir.is_dir() {
            return Err(Error::Config(format!(
                "input_dir {} is not a directory",
                self.input_dir.display()
            )));
        }
        if self.filename_pattern.is_empty() {
            return Err(Error::Config("filename_pattern must not be empty".to_string()));
        }
        for spec in &self.covariates {
            if !spec.path.is_file() {
                return Err(Error::Config(format!(
                    "covariate file {} not found",
                    spec.path.display()
                )));
            }
        }
        if !self.association_dates.is_empty() {
            if self.covariates.is_empty() {
                return Err(Error::Config(
                    "association_dates set but no covariate files configured".to_string(),
                ));
            }
            if self.reference_point.is_none() {
                return Err(Error::Config(
                    "association tests need reference_point for the distance covariate".to_string(),
                ));
            }
        }
        if let Some(v) = &self.vacation_period {
            if v.end < v.start {
                return Err(Error::Config("vacation_period ends before it starts".to_string()));
            }
        }
        Ok(())
    }

    /// Scan the input directory for files matching the date pattern;
    /// returns (date, path) pairs sorted by date.
    pub fn discover_days(&self) -> Result<Vec<(NaiveDate, PathBuf)>> {
        let mut days = Vec::new();
        for entry in std::fs::read_dir(&self.input_dir)? {
            let entry = entry?;
            if !entry.file_type()?.is_file() {
                continue;
            }
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Ok(date) = NaiveDate::parse_from_str(name, &self.filename_pattern) {
                days.push((date, entry.path()));
            }
        }
        days.sort();
        Ok(days)
    }

    /// Event dates must fall inside the discovered date range.
    pub fn check_event_dates(&self, days: &[(NaiveDate, PathBuf)]) -> Result<()> {
        if self.event_dates.is_empty() || days.is_empty() {
            return Ok(());
        }
        let lo = days[0].0;
        let hi = days[days.len() - 1].0;
        for d in &self.event_dates {
            if *d < lo || *d > hi {
                return Err(Error::Config(format!(
                    "event date {d} outside the input range {lo}..{hi}"
                )));
            }
        }
        Ok(())
    }
}
