//! Climate Analysis vocabulary and the record→triple mappings for its two
//! classes, Station and Observation.
//!
//! Values are stored in canonical units: °C for temperatures, mm for
//! precipitation and snowfall. Weather-type codes (WT01 and friends) carry
//! boolean values so flag observations stay queryable alongside numeric ones.

use chrono::NaiveDate;
use thiserror::Error;

use crate::rdf::{vocab, Iri, Literal, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaError {
    #[error("station id must not be empty")]
    EmptyStationId,
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("unknown datatype code {0:?}")]
    UnknownDatatypeCode(String),
    #[error("datatype code {code} expects a {expected} value")]
    ValueKindMismatch {
        code: String,
        expected: &'static str,
    },
    #[error("invalid vocabulary base IRI: {0}")]
    InvalidBase(String),
}

/// Supported NOAA daily-summary datatype codes with their meanings.
pub const DATATYPE_CODES: [(&str, &str); 11] = [
    ("TAVG", "average temperature (°C)"),
    ("TMAX", "maximum temperature (°C)"),
    ("TMIN", "minimum temperature (°C)"),
    ("PRCP", "precipitation (mm)"),
    ("SNOW", "snowfall (mm)"),
    ("WT01", "fog"),
    ("WT02", "heavy fog"),
    ("WT08", "haze"),
    ("WT14", "drizzle"),
    ("WT16", "rain"),
    ("WT18", "snow"),
];

pub fn is_known_code(code: &str) -> bool {
    DATATYPE_CODES.iter().any(|(c, _)| *c == code)
}

/// WT-prefixed codes are day-level flags rather than measurements.
pub fn is_flag_code(code: &str) -> bool {
    code.starts_with("WT")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationRecord {
    station_id: String,
    name: String,
    latitude: f64,
    longitude: f64,
}

impl StationRecord {
    pub fn new(
        station_id: impl Into<String>,
        name: impl Into<String>,
        latitude: f64,
        longitude: f64,
    ) -> Result<Self, CaError> {
        let station_id = station_id.into();
        if station_id.is_empty() {
            return Err(CaError::EmptyStationId);
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(CaError::LatitudeOutOfRange(latitude));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(CaError::LongitudeOutOfRange(longitude));
        }
        Ok(StationRecord {
            station_id,
            name: name.into(),
            latitude,
            longitude,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    pub fn longitude(&self) -> f64 {
        self.longitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationValue {
    Numeric(f64),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord {
    station_id: String,
    date: NaiveDate,
    datatype_code: String,
    value: ObservationValue,
}

impl ObservationRecord {
    pub fn new(
        station_id: impl Into<String>,
        date: NaiveDate,
        datatype_code: impl Into<String>,
        value: ObservationValue,
    ) -> Result<Self, CaError> {
        let station_id = station_id.into();
        if station_id.is_empty() {
            return Err(CaError::EmptyStationId);
        }
        let datatype_code = datatype_code.into();
        if !is_known_code(&datatype_code) {
            return Err(CaError::UnknownDatatypeCode(datatype_code));
        }
        match (is_flag_code(&datatype_code), value) {
            (true, ObservationValue::Numeric(_)) => Err(CaError::ValueKindMismatch {
                code: datatype_code,
                expected: "boolean",
            }),
            (false, ObservationValue::Flag(_)) => Err(CaError::ValueKindMismatch {
                code: datatype_code,
                expected: "numeric",
            }),
            _ => Ok(ObservationRecord {
                station_id,
                date,
                datatype_code,
                value,
            }),
        }
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn datatype_code(&self) -> &str {
        &self.datatype_code
    }

    pub fn value(&self) -> ObservationValue {
        self.value
    }
}

/// IRI factory for the CA namespace family. All minting is deterministic so
/// repeated ingestion maps equal records to equal triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    base: String,
}

pub const DEFAULT_BASE: &str = "http://example.org/climakg";

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            base: DEFAULT_BASE.to_string(),
        }
    }
}

impl Vocabulary {
    pub fn new(base: impl Into<String>) -> Result<Self, CaError> {
        let base = base.into().trim_end_matches('/').to_string();
        Iri::new(base.clone()).map_err(|e| CaError::InvalidBase(e.to_string()))?;
        Ok(Vocabulary { base })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn iri(&self, suffix: &str) -> Iri {
        Iri::new(format!("{}/{suffix}", self.base)).expect("base validated at construction")
    }

    pub fn class_station(&self) -> Iri {
        self.iri("ca#Station")
    }

    pub fn class_observation(&self) -> Iri {
        self.iri("ca#Observation")
    }

    pub fn prop_station_id(&self) -> Iri {
        self.iri("ca#stationId")
    }

    pub fn prop_station_name(&self) -> Iri {
        self.iri("ca#stationName")
    }

    pub fn prop_latitude(&self) -> Iri {
        self.iri("ca#latitude")
    }

    pub fn prop_longitude(&self) -> Iri {
        self.iri("ca#longitude")
    }

    pub fn prop_generated_by(&self) -> Iri {
        self.iri("ca#generatedBy")
    }

    pub fn prop_observation_date(&self) -> Iri {
        self.iri("ca#observationDate")
    }

    pub fn prop_with_datatype(&self) -> Iri {
        self.iri("ca#withDataType")
    }

    pub fn prop_has_value(&self) -> Iri {
        self.iri("ca#hasValue")
    }

    /// Namespace IRI for the `ca:` prefix, for use in queries.
    pub fn ca_namespace(&self) -> String {
        format!("{}/ca#", self.base)
    }

    /// Namespace IRI for the `noaa:` prefix, for use in queries.
    pub fn noaa_namespace(&self) -> String {
        format!("{}/noaa#", self.base)
    }

    pub fn datatype_iri(&self, code: &str) -> Result<Iri, CaError> {
        if !is_known_code(code) {
            return Err(CaError::UnknownDatatypeCode(code.to_string()));
        }
        Ok(self.iri(&format!("noaa#{code}")))
    }

    pub fn mint_station_iri(&self, station_id: &str) -> Iri {
        self.iri(&format!("station/{}", sanitize(station_id)))
    }

    pub fn mint_observation_iri(&self, station_id: &str, date: NaiveDate, code: &str) -> Iri {
        self.iri(&format!(
            "obs/{}/{}/{code}",
            sanitize(station_id),
            date.format("%Y-%m-%d")
        ))
    }
}

/// Station ids embed ':' (GHCND composites); IRI-hostile characters become '_'.
fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c == ':' || c == '/' || c.is_whitespace() {
                '_'
            } else {
                c
            }
        })
        .collect()
}

/// Exactly five triples per station: type, id, name, latitude, longitude.
pub fn station_to_triples(vocab_: &Vocabulary, s: &StationRecord) -> Vec<Triple> {
    let node = vocab_.mint_station_iri(&s.station_id);
    vec![
        Triple::new(
            node.clone(),
            vocab::RDF_TYPE.clone(),
            Term::Iri(vocab_.class_station()),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_station_id(),
            Term::Literal(Literal::string(&s.station_id)),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_station_name(),
            Term::Literal(Literal::string(&s.name)),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_latitude(),
            Term::Literal(Literal::double(s.latitude)),
        ),
        Triple::new(
            node,
            vocab_.prop_longitude(),
            Term::Literal(Literal::double(s.longitude)),
        ),
    ]
}

/// Exactly five triples per observation: type, generatedBy, observationDate,
/// withDataType, hasValue.
pub fn observation_to_triples(
    vocab_: &Vocabulary,
    o: &ObservationRecord,
) -> Result<Vec<Triple>, CaError> {
    let datatype = vocab_.datatype_iri(&o.datatype_code)?;
    let node = vocab_.mint_observation_iri(&o.station_id, o.date, &o.datatype_code);
    let value = match o.value {
        ObservationValue::Numeric(v) => Literal::double(v),
        ObservationValue::Flag(v) => Literal::boolean(v),
    };
    Ok(vec![
        Triple::new(
            node.clone(),
            vocab::RDF_TYPE.clone(),
            Term::Iri(vocab_.class_observation()),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_generated_by(),
            Term::Iri(vocab_.mint_station_iri(&o.station_id)),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_observation_date(),
            Term::Literal(Literal::date(o.date)),
        ),
        Triple::new(
            node.clone(),
            vocab_.prop_with_datatype(),
            Term::Iri(datatype),
        ),
        Triple::new(node, vocab_.prop_has_value(), Term::Literal(value)),
    ])
}
