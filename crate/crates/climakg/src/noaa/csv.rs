//! NOAA daily-summary CSV parsing. Columns are located by header name, so
//! exports with reordered or missing optional columns still load.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::ca::{is_flag_code, ObservationRecord, ObservationValue, StationRecord, DATATYPE_CODES};
use crate::noaa::NoaaError;

const MISSING_SENTINEL: &str = "-9999";

fn is_missing(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell == MISSING_SENTINEL
}

/// One station record per distinct station id (first row wins for metadata),
/// one observation per non-missing supported cell. Values are kept in the
/// file's unit regime; see [`crate::noaa::normalize_units`].
pub fn parse_csv(text: &str) -> Result<(Vec<StationRecord>, Vec<ObservationRecord>), NoaaError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| NoaaError::CsvSyntax {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let station_col =
        find("STATION").ok_or_else(|| NoaaError::MissingColumn("STATION".to_string()))?;
    let date_col = find("DATE").ok_or_else(|| NoaaError::MissingColumn("DATE".to_string()))?;
    let name_col = find("NAME");
    let lat_col = find("LATITUDE");
    let lon_col = find("LONGITUDE");
    let value_cols: Vec<(&'static str, usize)> = DATATYPE_CODES
        .iter()
        .filter_map(|(code, _)| find(code).map(|i| (*code, i)))
        .collect();

    let mut stations: BTreeMap<String, StationRecord> = BTreeMap::new();
    let mut station_order: Vec<String> = Vec::new();
    let mut observations = Vec::new();
    for (index, record) in reader.records().enumerate() {
        // Row numbers are 1-based and count the header line.
        let row = index + 2;
        let record = record.map_err(|e| NoaaError::CsvSyntax {
            row,
            message: e.to_string(),
        })?;
        let cell = |col: usize| record.get(col).unwrap_or("").trim();
        let station_id = cell(station_col);
        if station_id.is_empty() {
            return Err(NoaaError::CsvSyntax {
                row,
                message: "empty STATION cell".to_string(),
            });
        }
        let date = parse_date(cell(date_col), row)?;
        if !stations.contains_key(station_id) {
            let latitude = opt_number(lat_col.map(cell), "LATITUDE", row)?.unwrap_or(0.0);
            let longitude = opt_number(lon_col.map(cell), "LONGITUDE", row)?.unwrap_or(0.0);
            let name = name_col.map(cell).unwrap_or("");
            let station = StationRecord::new(station_id, name, latitude, longitude)?;
            stations.insert(station_id.to_string(), station);
            station_order.push(station_id.to_string());
        }
        for (code, col) in &value_cols {
            let raw = cell(*col);
            if is_missing(raw) {
                continue;
            }
            let value = if is_flag_code(code) {
                match raw {
                    "1" => ObservationValue::Flag(true),
                    "0" => continue,
                    other => {
                        return Err(NoaaError::CsvSyntax {
                            row,
                            message: format!(
                                "weather-type cell {code} holds {other:?}, expected \"1\""
                            ),
                        })
                    }
                }
            } else {
                let number = raw.parse::<f64>().map_err(|_| NoaaError::CsvSyntax {
                    row,
                    message: format!("cell {code} holds {raw:?}, expected a number"),
                })?;
                ObservationValue::Numeric(number)
            };
            observations.push(ObservationRecord::new(station_id, date, *code, value)?);
        }
    }
    let stations = station_order
        .into_iter()
        .map(|id| stations.remove(&id).expect("id recorded on insert"))
        .collect();
    Ok((stations, observations))
}

fn parse_date(cell: &str, row: usize) -> Result<NaiveDate, NoaaError> {
    NaiveDate::parse_from_str(cell, "%Y-%m-%d").map_err(|_| NoaaError::CsvSyntax {
        row,
        message: format!("DATE cell holds {cell:?}, expected YYYY-MM-DD"),
    })
}

fn opt_number(cell: Option<&str>, column: &str, row: usize) -> Result<Option<f64>, NoaaError> {
    match cell {
        None => Ok(None),
        Some(raw) if is_missing(raw) => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|_| NoaaError::CsvSyntax {
                row,
                message: format!("cell {column} holds {raw:?}, expected a number"),
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "STATION,NAME,DATE,LATITUDE,LONGITUDE,TAVG,TMAX,TMIN,PRCP,SNOW,WT01,WT02,WT08,WT14,WT16,WT18";

    #[test]
    fn ten_rows_single_station_two_columns() {
        let mut doc = String::from(HEADER);
        for day in 1..=10 {
            doc.push_str(&format!(
                "\nGHCND:EI000003969,\"DUBLIN AIRPORT, EI\",1980-01-{day:02},53.428,-6.241,{},,,{},,,,,,,",
                4.0 + day as f64,
                0.1 * day as f64,
            ));
        }
        let (stations, observations) = parse_csv(&doc).unwrap();
        assert_eq!(stations.len(), 1);
        assert_eq!(observations.len(), 20);
        assert_eq!(stations[0].name(), "DUBLIN AIRPORT, EI");
        assert!((stations[0].latitude() - 53.428).abs() < 1e-12);
    }

    #[test]
    fn missing_cells_and_sentinels_emit_nothing() {
        let doc = format!("{HEADER}\nGHCND:X,SITE,2000-01-01,1.0,2.0,,-9999,5.5,,,,,,,,");
        let (_, observations) = parse_csv(&doc).unwrap();
        assert_eq!(observations.len(), 1);
        assert_eq!(observations[0].datatype_code(), "TMIN");
    }

    #[test]
    fn weather_type_one_becomes_true_flag() {
        let doc = format!("{HEADER}\nGHCND:X,SITE,1951-02-03,0,0,,,,,,,,1,,,");
        let (_, observations) = parse_csv(&doc).unwrap();
        assert_eq!(observations.len(), 1);
        assert_eq!(observations[0].datatype_code(), "WT08");
        assert_eq!(observations[0].value(), ObservationValue::Flag(true));
    }

    #[test]
    fn weather_type_zero_emits_no_record() {
        let doc = format!("{HEADER}\nGHCND:X,SITE,1951-02-03,0,0,,,,,,0,,,,,");
        let (_, observations) = parse_csv(&doc).unwrap();
        assert!(observations.is_empty());
    }

    #[test]
    fn required_columns_are_checked() {
        let doc = "STATION,NAME\nGHCND:X,SITE";
        match parse_csv(doc).unwrap_err() {
            NoaaError::MissingColumn(c) => assert_eq!(c, "DATE"),
            other => panic!("unexpected error {other:?}"),
        }
        let doc = "NAME,DATE\nSITE,2000-01-01";
        match parse_csv(doc).unwrap_err() {
            NoaaError::MissingColumn(c) => assert_eq!(c, "STATION"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_cells_report_their_row() {
        let doc = format!(
            "{HEADER}\nGHCND:X,SITE,2000-01-01,0,0,4.5,,,,,,,,,,\nGHCND:X,SITE,2000-01-02,0,0,oops,,,,,,,,,,"
        );
        match parse_csv(&doc).unwrap_err() {
            NoaaError::CsvSyntax { row, message } => {
                assert_eq!(row, 3);
                assert!(message.contains("TAVG"), "message: {message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let doc = format!("{HEADER}\nGHCND:X,SITE,2000-13-01,0,0,,,,,,,,,,,");
        match parse_csv(&doc).unwrap_err() {
            NoaaError::CsvSyntax { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn columns_found_by_name_not_position() {
        let doc = "DATE,TAVG,STATION\n2000-01-01,7.5,GHCND:X";
        let (stations, observations) = parse_csv(doc).unwrap();
        assert_eq!(stations.len(), 1);
        assert_eq!(stations[0].latitude(), 0.0);
        assert_eq!(observations.len(), 1);
        assert_eq!(observations[0].value(), ObservationValue::Numeric(7.5));
    }

    #[test]
    fn station_metadata_first_row_wins() {
        let doc = format!(
            "{HEADER}\nGHCND:X,FIRST,2000-01-01,1.5,2.5,1,,,,,,,,,,\nGHCND:X,SECOND,2000-01-02,9.9,9.9,2,,,,,,,,,,"
        );
        let (stations, observations) = parse_csv(&doc).unwrap();
        assert_eq!(stations.len(), 1);
        assert_eq!(stations[0].name(), "FIRST");
        assert_eq!(observations.len(), 2);
    }
}
