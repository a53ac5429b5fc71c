//! Monthly temperature box statistics and the rule-based weather-type
//! classifier with its per-day distribution series.

pub mod emit;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::ca::{ObservationRecord, ObservationValue};

pub use emit::{box_plot_svg, box_stats_csv, distribution_csv, strip_plot_svg};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("input is empty")]
    EmptyInput,
    #[error("no qualifying observations for station {station_id} in the requested years")]
    NoData { station_id: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyBoxStats {
    pub month: u32,
    pub n: usize,
    pub minimum: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub maximum: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    pub outlier_count: usize,
    pub mean: f64,
}

/// Linear-interpolation quantiles: position h = (n−1)·p over sorted values.
pub fn quartiles(values: &[f64]) -> Result<(f64, f64, f64), AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("temperature values are finite"));
    Ok((
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    ))
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if frac == 0.0 || lo + 1 >= sorted.len() {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Daily temperature series for one station: TAVG when present, otherwise
/// (TMAX+TMIN)/2 when both are. Returns date → °C.
pub fn daily_temperatures(
    observations: &[ObservationRecord],
    station_id: &str,
    years: &RangeInclusive<i32>,
) -> BTreeMap<NaiveDate, f64> {
    let mut tavg: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    let mut tmax: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    let mut tmin: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for o in observations {
        if o.station_id() != station_id || !years.contains(&o.date().year()) {
            continue;
        }
        let value = match o.value() {
            ObservationValue::Numeric(v) => v,
            ObservationValue::Flag(_) => continue,
        };
        let slot = match o.datatype_code() {
            "TAVG" => &mut tavg,
            "TMAX" => &mut tmax,
            "TMIN" => &mut tmin,
            _ => continue,
        };
        slot.entry(o.date()).or_insert(value);
    }
    let mut fallback_days = 0usize;
    let mut out = tavg;
    for (date, max) in &tmax {
        if out.contains_key(date) {
            continue;
        }
        if let Some(min) = tmin.get(date) {
            out.insert(*date, (max + min) / 2.0);
            fallback_days += 1;
        }
    }
    if fallback_days > 0 {
        log::info!("{station_id}: {fallback_days} day(s) used (TMAX+TMIN)/2 for missing TAVG");
    }
    out
}

/// Groups daily temperatures by calendar month across all years in range.
/// Months without samples are omitted with a warning.
pub fn monthly_temperature_stats(
    observations: &[ObservationRecord],
    station_id: &str,
    years: RangeInclusive<i32>,
) -> Result<Vec<MonthlyBoxStats>, AnalyticsError> {
    let daily = daily_temperatures(observations, station_id, &years);
    if daily.is_empty() {
        return Err(AnalyticsError::NoData {
            station_id: station_id.to_string(),
        });
    }
    let mut by_month: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (date, temp) in &daily {
        by_month.entry(date.month()).or_default().push(*temp);
    }
    let mut out = Vec::new();
    for month in 1..=12 {
        let Some(values) = by_month.get(&month) else {
            log::warn!("{station_id}: no temperature samples for month {month}, omitting");
            continue;
        };
        out.push(box_stats(month, values));
    }
    Ok(out)
}

fn box_stats(month: u32, values: &[f64]) -> MonthlyBoxStats {
    let (q1, median, q3) = quartiles(values).expect("months with samples only");
    let iqr = q3 - q1;
    let lower_fence = q1 - 1.5 * iqr;
    let upper_fence = q3 + 1.5 * iqr;
    let minimum = values.iter().copied().fold(f64::INFINITY, f64::min);
    let maximum = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outlier_count = values
        .iter()
        .filter(|v| **v < lower_fence || **v > upper_fence)
        .count();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    MonthlyBoxStats {
        month,
        n: values.len(),
        minimum,
        q1,
        median,
        q3,
        maximum,
        lower_fence,
        upper_fence,
        outlier_count,
        mean,
    }
}

/// Per-day classifier input assembled from WT flags plus auxiliary numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct DayWeatherInput {
    pub date: NaiveDate,
    pub rain_flag: bool,
    pub snow_flag: bool,
    pub fog_flag: bool,
    pub haze_flag: bool,
    pub precipitation: Option<f64>,
    pub temperature: Option<f64>,
}

impl DayWeatherInput {
    pub fn new(date: NaiveDate) -> Self {
        DayWeatherInput {
            date,
            rain_flag: false,
            snow_flag: false,
            fog_flag: false,
            haze_flag: false,
            precipitation: None,
            temperature: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WeatherLabel {
    Rain,
    Snow,
    Fog,
    Drizzle,
    Sun,
}

impl WeatherLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            WeatherLabel::Rain => "rain",
            WeatherLabel::Snow => "snow",
            WeatherLabel::Fog => "fog",
            WeatherLabel::Drizzle => "drizzle",
            WeatherLabel::Sun => "sun",
        }
    }

    pub const ALL: [WeatherLabel; 5] = [
        WeatherLabel::Rain,
        WeatherLabel::Snow,
        WeatherLabel::Fog,
        WeatherLabel::Drizzle,
        WeatherLabel::Sun,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Highest temperature (°C) at which a flagged snow day still counts as snow.
    pub snow_max_temp: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { snow_max_temp: 0.0 }
    }
}

pub fn classify_day(day: &DayWeatherInput) -> WeatherLabel {
    classify_day_with(day, &ClassifierConfig::default())
}

/// First matching rule wins: rain, snow, fog, drizzle, sun. Absent numeric
/// fields count as 0.
pub fn classify_day_with(day: &DayWeatherInput, config: &ClassifierConfig) -> WeatherLabel {
    let precipitation = day.precipitation.unwrap_or(0.0);
    let temperature = day.temperature.unwrap_or(0.0);
    if day.rain_flag && precipitation > 0.0 && temperature > 0.0 {
        WeatherLabel::Rain
    } else if day.snow_flag && precipitation > 0.0 && temperature <= config.snow_max_temp {
        WeatherLabel::Snow
    } else if day.fog_flag {
        WeatherLabel::Fog
    } else if day.haze_flag {
        WeatherLabel::Drizzle
    } else {
        WeatherLabel::Sun
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSeries {
    pub year: i32,
    /// (day_of_year, label), one entry per day of the year.
    pub entries: Vec<(u32, WeatherLabel)>,
}

/// Classifies every day of each requested year. Days without input data
/// default to Sun.
pub fn weather_distribution(days: &[DayWeatherInput], years: &[i32]) -> Vec<DistributionSeries> {
    weather_distribution_with(days, years, &ClassifierConfig::default())
}

pub fn weather_distribution_with(
    days: &[DayWeatherInput],
    years: &[i32],
    config: &ClassifierConfig,
) -> Vec<DistributionSeries> {
    let mut by_date: BTreeMap<NaiveDate, &DayWeatherInput> = BTreeMap::new();
    for day in days {
        by_date.entry(day.date).or_insert(day);
    }
    years
        .iter()
        .map(|&year| {
            let mut entries = Vec::new();
            let mut date = NaiveDate::from_ymd_opt(year, 1, 1).expect("January 1st always exists");
            while date.year() == year {
                let label = match by_date.get(&date) {
                    Some(day) => classify_day_with(day, config),
                    None => WeatherLabel::Sun,
                };
                entries.push((date.ordinal(), label));
                date = date.succ_opt().expect("in-range dates have successors");
            }
            DistributionSeries { year, entries }
        })
        .collect()
}
