//! CDO v2 JSON handling: page parsing plus paged fetching, either against
//! the live API or from a directory of fixture pages.

use std::path::Path;
use std::time::Duration;

use serde_json::Value;

use crate::ca::{is_flag_code, ObservationRecord, ObservationValue};
use crate::noaa::{FetchSpec, NoaaError, CDO_BASE_URL};

const MAX_ATTEMPTS: u32 = 5;

/// One parsed CDO response page: records plus resultset metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CdoPage {
    pub records: Vec<ObservationRecord>,
    pub offset: u64,
    pub count: u64,
    pub limit: u64,
}

pub fn parse_cdo_json(text: &str) -> Result<CdoPage, NoaaError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| NoaaError::JsonSyntax(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| NoaaError::JsonSyntax("top level is not an object".to_string()))?;
    if !obj.contains_key("results") && !obj.contains_key("metadata") {
        // CDO answers a bare `{}` when nothing matches the query.
        return Ok(CdoPage {
            records: Vec::new(),
            offset: 0,
            count: 0,
            limit: 0,
        });
    }
    let resultset = doc
        .pointer("/metadata/resultset")
        .and_then(Value::as_object)
        .ok_or_else(|| NoaaError::MissingField("metadata.resultset".to_string()))?;
    let meta = |key: &str| {
        resultset
            .get(key)
            .and_then(Value::as_u64)
            .ok_or_else(|| NoaaError::MissingField(format!("metadata.resultset.{key}")))
    };
    let offset = meta("offset")?;
    let count = meta("count")?;
    let limit = meta("limit")?;
    let results = obj
        .get("results")
        .and_then(Value::as_array)
        .ok_or_else(|| NoaaError::MissingField("results".to_string()))?;
    let mut records = Vec::with_capacity(results.len());
    for (i, entry) in results.iter().enumerate() {
        let field = |name: &str| {
            entry
                .get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| NoaaError::MissingField(format!("results[{i}].{name}")))
        };
        let date_raw = field("date")?;
        let date = date_raw
            .get(..10)
            .and_then(|prefix| prefix.parse().ok())
            .ok_or_else(|| {
                NoaaError::JsonSyntax(format!(
                    "results[{i}].date holds {date_raw:?}, expected an ISO timestamp"
                ))
            })?;
        let datatype = field("datatype")?;
        let station = field("station")?;
        let number = entry
            .get("value")
            .and_then(Value::as_f64)
            .ok_or_else(|| NoaaError::MissingField(format!("results[{i}].value")))?;
        let value = if is_flag_code(datatype) {
            ObservationValue::Flag(number != 0.0)
        } else {
            ObservationValue::Numeric(number)
        };
        records.push(ObservationRecord::new(station, date, datatype, value)?);
    }
    Ok(CdoPage {
        records,
        offset,
        count,
        limit,
    })
}

/// Reads every `*.json` page in the directory in filename order.
pub(super) fn fetch_fixture_pages(dir: &Path) -> Result<Vec<ObservationRecord>, NoaaError> {
    let listing = std::fs::read_dir(dir)
        .map_err(|e| NoaaError::FixtureMissing(format!("{}: {e}", dir.display())))?;
    let mut pages: Vec<_> = listing
        .filter_map(Result::ok)
        .map(|entry| entry.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    if pages.is_empty() {
        return Err(NoaaError::FixtureMissing(format!(
            "{}: no .json pages found",
            dir.display()
        )));
    }
    pages.sort();
    let mut records = Vec::new();
    for page in pages {
        let text = std::fs::read_to_string(&page)
            .map_err(|e| NoaaError::FixtureMissing(format!("{}: {e}", page.display())))?;
        records.extend(parse_cdo_json(&text)?.records);
    }
    Ok(records)
}

pub(super) fn fetch_online(spec: &FetchSpec) -> Result<Vec<ObservationRecord>, NoaaError> {
    let token = spec
        .token
        .as_deref()
        .filter(|t| !t.is_empty())
        .ok_or_else(|| NoaaError::Auth("no API token configured".to_string()))?;
    let base = spec.base_url.as_deref().unwrap_or(CDO_BASE_URL);
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_secs(30))
        .build();
    let mut out = Vec::new();
    let mut offset: u64 = 0;
    loop {
        let page = fetch_page(&agent, base, spec, token, offset)?;
        let empty = page.records.is_empty();
        out.extend(page.records);
        offset += spec.page_size;
        if offset >= page.count || empty {
            break;
        }
    }
    Ok(out)
}

fn fetch_page(
    agent: &ureq::Agent,
    base: &str,
    spec: &FetchSpec,
    token: &str,
    offset: u64,
) -> Result<CdoPage, NoaaError> {
    let mut attempt = 0u32;
    loop {
        attempt += 1;
        let mut request = agent
            .get(base)
            .set("token", token)
            .query("datasetid", &spec.dataset)
            .query("startdate", &spec.start.to_string())
            .query("enddate", &spec.end.to_string())
            .query("limit", &spec.page_size.to_string())
            .query("offset", &offset.to_string());
        for station in &spec.stations {
            request = request.query("stationid", station);
        }
        for datatype in &spec.datatypes {
            request = request.query("datatypeid", datatype);
        }
        if let Some(units) = &spec.units_param {
            request = request.query("units", units);
        }
        let failure = match request.call() {
            Ok(response) => {
                let body = response
                    .into_string()
                    .map_err(|e| NoaaError::Transport(e.to_string()))?;
                return parse_cdo_json(&body);
            }
            Err(ureq::Error::Status(code, _)) => match code {
                401 | 403 => return Err(NoaaError::Auth(format!("HTTP {code}"))),
                429 => {
                    if attempt >= MAX_ATTEMPTS {
                        return Err(NoaaError::RateLimited { attempts: attempt });
                    }
                    format!("HTTP {code}")
                }
                500..=599 => {
                    if attempt >= MAX_ATTEMPTS {
                        return Err(NoaaError::Transport(format!(
                            "HTTP {code} after {attempt} attempts"
                        )));
                    }
                    format!("HTTP {code}")
                }
                other => return Err(NoaaError::Transport(format!("HTTP {other}"))),
            },
            Err(e) => {
                if attempt >= MAX_ATTEMPTS {
                    return Err(NoaaError::Transport(e.to_string()));
                }
                e.to_string()
            }
        };
        let delay = spec.retry_base_ms.saturating_mul(1 << (attempt - 1));
        log::warn!("CDO request failed ({failure}), retrying in {delay} ms");
        std::thread::sleep(Duration::from_millis(delay));
    }
}
