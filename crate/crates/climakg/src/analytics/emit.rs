//! Deterministic CSV and SVG renderings of the two analysis outputs.
//!
//! All geometry is computed from the input alone, so identical inputs give
//! byte-identical files.

use chrono::NaiveDate;

use super::{AnalyticsError, DistributionSeries, MonthlyBoxStats, WeatherLabel};

const MONTH_NAMES: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// One fill colour per station series in a box plot.
const SERIES_COLOURS: [&str; 6] = [
    "#7fb3d5", "#f5b041", "#82e0aa", "#c39bd3", "#f1948a", "#aab7b8",
];

fn label_colour(label: WeatherLabel) -> &'static str {
    match label {
        WeatherLabel::Rain => "#2e86c1",
        WeatherLabel::Snow => "#aab7b8",
        WeatherLabel::Fog => "#76448a",
        WeatherLabel::Drizzle => "#f39c12",
        WeatherLabel::Sun => "#f4d03f",
    }
}

/// `station,month,n,min,q1,median,q3,max,lower_fence,upper_fence,outliers,mean`
/// with one row per (station, month).
pub fn box_stats_csv(groups: &[(String, Vec<MonthlyBoxStats>)]) -> Result<String, AnalyticsError> {
    if groups.iter().all(|(_, stats)| stats.is_empty()) {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "station",
            "month",
            "n",
            "min",
            "q1",
            "median",
            "q3",
            "max",
            "lower_fence",
            "upper_fence",
            "outliers",
            "mean",
        ])
        .expect("writing to memory cannot fail");
    for (station, stats) in groups {
        for s in stats {
            writer
                .write_record([
                    station.clone(),
                    s.month.to_string(),
                    s.n.to_string(),
                    s.minimum.to_string(),
                    s.q1.to_string(),
                    s.median.to_string(),
                    s.q3.to_string(),
                    s.maximum.to_string(),
                    s.lower_fence.to_string(),
                    s.upper_fence.to_string(),
                    s.outlier_count.to_string(),
                    s.mean.to_string(),
                ])
                .expect("writing to memory cannot fail");
        }
    }
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `year,day_of_year,date,label` with one row per classified day.
pub fn distribution_csv(series: &[DistributionSeries]) -> Result<String, AnalyticsError> {
    if series.iter().all(|s| s.entries.is_empty()) {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["year", "day_of_year", "date", "label"])
        .expect("writing to memory cannot fail");
    for s in series {
        for (day_of_year, label) in &s.entries {
            let date = NaiveDate::from_yo_opt(s.year, *day_of_year)
                .expect("entries carry valid ordinals for their year");
            writer
                .write_record([
                    s.year.to_string(),
                    day_of_year.to_string(),
                    date.to_string(),
                    label.as_str().to_string(),
                ])
                .expect("writing to memory cannot fail");
        }
    }
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{width:.0}\" height=\"{height:.0}\" \
             viewBox=\"0 0 {width:.0} {height:.0}\">\n"
        ));
        body.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
        ));
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, extra: &str) {
        self.body.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\"{extra}/>\n"
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"{fill}\"{extra}/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: u32, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\" font-size=\"{size}\" fill=\"#333333\">{}</text>\n",
            escape_text(content)
        ));
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Vertical axis mapping values to pixels, higher values up.
struct YScale {
    min: f64,
    max: f64,
    top: f64,
    bottom: f64,
}

impl YScale {
    fn new(min: f64, max: f64, top: f64, bottom: f64) -> Self {
        let pad = if max > min { (max - min) * 0.05 } else { 1.0 };
        YScale {
            min: min - pad,
            max: max + pad,
            top,
            bottom,
        }
    }

    fn y(&self, value: f64) -> f64 {
        let t = (value - self.min) / (self.max - self.min);
        self.bottom - t * (self.bottom - self.top)
    }
}

/// Grouped monthly box plot, one box per (station, month). Whiskers are
/// clamped to the Tukey fences; values beyond them only affect the outlier
/// count in the CSV output.
pub fn box_plot_svg(groups: &[(String, Vec<MonthlyBoxStats>)]) -> Result<String, AnalyticsError> {
    if groups.iter().all(|(_, stats)| stats.is_empty()) {
        return Err(AnalyticsError::EmptyInput);
    }
    let stations = groups.len();
    let box_w = 16.0;
    let box_gap = 4.0;
    let slot_pad = 12.0;
    let slot_w = stations as f64 * (box_w + box_gap) + slot_pad;
    let left = 52.0;
    let top = 34.0;
    let plot_h = 300.0;
    let bottom = top + plot_h;
    let width = left + 12.0 * slot_w + 20.0;
    let height = bottom + 42.0;

    let mut value_min = f64::INFINITY;
    let mut value_max = f64::NEG_INFINITY;
    for (_, stats) in groups {
        for s in stats {
            value_min = value_min.min(s.minimum.max(s.lower_fence));
            value_max = value_max.max(s.maximum.min(s.upper_fence));
        }
    }
    let scale = YScale::new(value_min, value_max, top, bottom);

    let mut svg = Svg::new(width, height);
    svg.text(
        left,
        20.0,
        "start",
        13,
        "Monthly temperature distribution (deg C)",
    );

    for tick in 0..=5 {
        let value = scale.min + (scale.max - scale.min) * tick as f64 / 5.0;
        let y = scale.y(value);
        svg.line(left - 4.0, y, left + 12.0 * slot_w, y, "#dddddd", "");
        svg.text(left - 8.0, y + 3.5, "end", 10, &format!("{value:.1}"));
    }
    svg.line(left, top, left, bottom, "#333333", "");
    svg.line(left, bottom, left + 12.0 * slot_w, bottom, "#333333", "");

    for month in 1..=12u32 {
        let x = left + (month as f64 - 1.0) * slot_w + slot_w / 2.0;
        svg.text(
            x,
            bottom + 16.0,
            "middle",
            10,
            MONTH_NAMES[month as usize - 1],
        );
    }

    for (si, (station, stats)) in groups.iter().enumerate() {
        let colour = SERIES_COLOURS[si % SERIES_COLOURS.len()];
        let legend_x = left + si as f64 * 180.0;
        svg.rect(legend_x, bottom + 26.0, 10.0, 10.0, colour, "");
        svg.text(legend_x + 14.0, bottom + 35.0, "start", 10, station);
        for s in stats {
            let x0 = left
                + (s.month as f64 - 1.0) * slot_w
                + slot_pad / 2.0
                + si as f64 * (box_w + box_gap);
            let cx = x0 + box_w / 2.0;
            let whisker_low = s.minimum.max(s.lower_fence);
            let whisker_high = s.maximum.min(s.upper_fence);
            let attrs = format!(" data-month=\"{}\" data-station=\"{si}\"", s.month);
            svg.line(cx, scale.y(whisker_high), cx, scale.y(s.q3), "#555555", "");
            svg.line(cx, scale.y(s.q1), cx, scale.y(whisker_low), "#555555", "");
            svg.line(
                cx - 4.0,
                scale.y(whisker_high),
                cx + 4.0,
                scale.y(whisker_high),
                "#555555",
                "",
            );
            svg.line(
                cx - 4.0,
                scale.y(whisker_low),
                cx + 4.0,
                scale.y(whisker_low),
                "#555555",
                "",
            );
            svg.rect(
                x0,
                scale.y(s.q3),
                box_w,
                scale.y(s.q1) - scale.y(s.q3),
                colour,
                &format!(" stroke=\"#333333\" class=\"box\"{attrs}"),
            );
            svg.line(
                x0,
                scale.y(s.median),
                x0 + box_w,
                scale.y(s.median),
                "#333333",
                &format!(" class=\"median\"{attrs}"),
            );
        }
    }
    Ok(svg.finish())
}

/// One horizontal strip per year, one coloured cell per day.
pub fn strip_plot_svg(series: &[DistributionSeries]) -> Result<String, AnalyticsError> {
    if series.iter().all(|s| s.entries.is_empty()) {
        return Err(AnalyticsError::EmptyInput);
    }
    let cell_w = 2.0;
    let row_h = 18.0;
    let row_gap = 8.0;
    let left = 52.0;
    let top = 34.0;
    let width = left + 366.0 * cell_w + 20.0;
    let rows = series.len() as f64;
    let height = top + rows * (row_h + row_gap) + 46.0;

    let mut svg = Svg::new(width, height);
    svg.text(left, 20.0, "start", 13, "Daily weather type by year");

    for (row, s) in series.iter().enumerate() {
        let y = top + row as f64 * (row_h + row_gap);
        svg.text(
            left - 8.0,
            y + row_h / 2.0 + 3.5,
            "end",
            10,
            &s.year.to_string(),
        );
        for (day_of_year, label) in &s.entries {
            let x = left + (*day_of_year as f64 - 1.0) * cell_w;
            svg.rect(
                x,
                y,
                cell_w,
                row_h,
                label_colour(*label),
                &format!(" class=\"day\" data-label=\"{}\"", label.as_str()),
            );
        }
    }

    let legend_y = top + rows * (row_h + row_gap) + 14.0;
    for (i, label) in WeatherLabel::ALL.iter().enumerate() {
        let x = left + i as f64 * 90.0;
        svg.rect(x, legend_y, 10.0, 10.0, label_colour(*label), "");
        svg.text(x + 14.0, legend_y + 9.0, "start", 10, label.as_str());
    }
    let first_of_month_ordinals = [1, 32, 61, 92, 122, 153, 183, 214, 245, 275, 306, 336];
    for (i, ordinal) in first_of_month_ordinals.iter().enumerate() {
        let x = left + (*ordinal as f64 - 1.0) * cell_w;
        let y = top + rows * (row_h + row_gap) - row_gap + 12.0;
        svg.text(x, y, "start", 9, MONTH_NAMES[i]);
    }
    Ok(svg.finish())
}
