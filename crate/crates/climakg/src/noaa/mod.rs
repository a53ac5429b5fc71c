//! NOAA daily-summary ingestion: CSV exports, CDO v2 JSON pages and unit
//! normalization into canonical °C / mm.

mod cdo;
mod csv;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::ca::{CaError, ObservationRecord, ObservationValue};

pub use cdo::{parse_cdo_json, CdoPage};
pub use csv::parse_csv;

#[derive(Debug, Error)]
pub enum NoaaError {
    #[error("CSV syntax error at row {row}: {message}")]
    CsvSyntax { row: usize, message: String },
    #[error("missing required column {0}")]
    MissingColumn(String),
    #[error("JSON syntax error: {0}")]
    JsonSyntax(String),
    #[error("missing field {0} in CDO response")]
    MissingField(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("fixture directory unusable: {0}")]
    FixtureMissing(String),
    #[error("unknown unit regime {0:?} (expected standard, metric or tenths)")]
    UnknownRegime(String),
    #[error("invalid fetch spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Record(#[from] CaError),
}

/// How raw NOAA numbers relate to canonical units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitRegime {
    /// °F and inches (CDO "standard").
    Standard,
    /// Already °C and mm (CDO "metric").
    Metric,
    /// GHCN raw scaling: temperatures and precipitation in tenths, snowfall in mm.
    Tenths,
}

impl FromStr for UnitRegime {
    type Err = NoaaError;

    fn from_str(s: &str) -> Result<Self, NoaaError> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(UnitRegime::Standard),
            "metric" => Ok(UnitRegime::Metric),
            "tenths" => Ok(UnitRegime::Tenths),
            other => Err(NoaaError::UnknownRegime(other.to_string())),
        }
    }
}

/// Converts one observation into canonical °C / mm. Flags pass through.
pub fn normalize_units(record: &ObservationRecord, regime: UnitRegime) -> ObservationRecord {
    let raw = match record.value() {
        ObservationValue::Flag(_) => return record.clone(),
        ObservationValue::Numeric(v) => v,
    };
    let code = record.datatype_code();
    let is_temperature = matches!(code, "TAVG" | "TMAX" | "TMIN");
    let converted = match regime {
        UnitRegime::Metric => raw,
        UnitRegime::Standard => {
            if is_temperature {
                (raw - 32.0) * 5.0 / 9.0
            } else {
                raw * 25.4
            }
        }
        UnitRegime::Tenths => {
            // GHCN raw scaling: temperatures in tenths of °C, PRCP in tenths
            // of mm, SNOW already in mm.
            if is_temperature || code == "PRCP" {
                raw / 10.0
            } else {
                raw
            }
        }
    };
    ObservationRecord::new(
        record.station_id(),
        record.date(),
        code,
        ObservationValue::Numeric(converted),
    )
    .expect("rebuilding a validated record cannot fail")
}

/// What and where to fetch. With `fixture_dir` set, no network is touched.
#[derive(Debug, Clone)]
pub struct FetchSpec {
    pub dataset: String,
    pub stations: Vec<String>,
    pub datatypes: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub page_size: u64,
    pub token: Option<String>,
    pub fixture_dir: Option<PathBuf>,
    /// Value of the CDO `units` query parameter, if any.
    pub units_param: Option<String>,
    /// Endpoint override, mainly for tests; defaults to the public CDO v2 URL.
    pub base_url: Option<String>,
    /// Base backoff delay in milliseconds for retries.
    pub retry_base_ms: u64,
}

pub const CDO_BASE_URL: &str = "https://www.ncei.noaa.gov/cdo-web/api/v2/data";

impl FetchSpec {
    pub fn new(dataset: impl Into<String>, start: NaiveDate, end: NaiveDate) -> Self {
        FetchSpec {
            dataset: dataset.into(),
            stations: Vec::new(),
            datatypes: Vec::new(),
            start,
            end,
            page_size: 1000,
            token: None,
            fixture_dir: None,
            units_param: None,
            base_url: None,
            retry_base_ms: 250,
        }
    }

    fn validate(&self) -> Result<(), NoaaError> {
        if self.start > self.end {
            return Err(NoaaError::InvalidSpec(format!(
                "start date {} after end date {}",
                self.start, self.end
            )));
        }
        if !(1..=1000).contains(&self.page_size) {
            return Err(NoaaError::InvalidSpec(format!(
                "page size {} outside [1, 1000]",
                self.page_size
            )));
        }
        Ok(())
    }
}

/// Fetches every page and concatenates records in page order, collapsing
/// duplicate (station, date, datatype) keys first-wins.
pub fn fetch_all(spec: &FetchSpec) -> Result<Vec<ObservationRecord>, NoaaError> {
    spec.validate()?;
    let records = match &spec.fixture_dir {
        Some(dir) => cdo::fetch_fixture_pages(dir)?,
        None => cdo::fetch_online(spec)?,
    };
    Ok(dedupe_observations(records))
}

/// First occurrence of each (station, date, datatype) key wins; later ones
/// are dropped with a warning.
pub fn dedupe_observations(records: Vec<ObservationRecord>) -> Vec<ObservationRecord> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let key = (
            record.station_id().to_string(),
            record.date(),
            record.datatype_code().to_string(),
        );
        if seen.insert(key) {
            out.push(record);
        } else {
            log::warn!(
                "dropping duplicate observation {} {} {}",
                record.station_id(),
                record.date(),
                record.datatype_code()
            );
        }
    }
    out
}
