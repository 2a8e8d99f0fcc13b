//! Minimal SVG line charts: squared error over time and sample-day curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::Datelike;
use yieldcast_core::backtest::{ForecastRecord, Method};

use crate::report::{term_label, write_atomic};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#000000"];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart with one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{b}" stroke="black"/>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="14" y="{}" font-size="11" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0, escape(y_label));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, MARGIN + 4.0, y1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.4}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN, y0);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, escape(ser.name), pts.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 14.0 * i as f64,
            escape(ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn day_number(r: &ForecastRecord) -> f64 {
    r.date.num_days_from_ce() as f64
}

/// Writes every plot into `dir` and returns the paths.
///
/// `records` holds one record list per method, all on the same dates.
pub fn write_plots(dir: &Path, records: &[(Method, Vec<ForecastRecord>)]) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let Some((_, first)) = records.first() else { return Ok(written) };
    let terms = first.first().map(|r| r.grid.terms().to_vec()).unwrap_or_default();

    for a in 0..records.len() {
        for b in a + 1..records.len() {
            let (ma, ra) = (&records[a].0, &records[a].1);
            let (mb, rb) = (&records[b].0, &records[b].1);
            for (j, term) in terms.iter().enumerate() {
                let series = [
                    Series { name: ma.name(), points: ra.iter().map(|r| (day_number(r), r.squared_error[j])).collect() },
                    Series { name: mb.name(), points: rb.iter().map(|r| (day_number(r), r.squared_error[j])).collect() },
                ];
                let title = format!("Squared error, {} ({} vs {})", term_label(*term), ma.name(), mb.name());
                let svg = line_chart(&title, "date", "squared error (percent²)", &series);
                let path = dir.join(format!("sqerr_{}_{}_{}m.svg", ma.name(), mb.name(), term));
                write_atomic(&path, svg.as_bytes())?;
                written.push(path);
            }
        }
    }

    let n = first.len();
    if n > 0 {
        for k in 1..=4 {
            let idx = (k * n / 5).min(n - 1);
            let day = &first[idx];
            let mut series = vec![Series { name: "actual", points: terms.iter().copied().zip(day.actual.iter().copied()).collect() }];
            for (m, recs) in records {
                if let Some(r) = recs.iter().find(|r| r.date == day.date) {
                    series.push(Series { name: m.name(), points: terms.iter().copied().zip(r.predicted.iter().copied()).collect() });
                }
            }
            let title = format!("Forecasts for {}", day.date);
            let svg = line_chart(&title, "term (months)", "yield (percent)", &series);
            let path = dir.join(format!("sample_day_{k}_{}.svg", day.date));
            write_atomic(&path, svg.as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_series() {
        let s = [
            Series { name: "a", points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.5)] },
            Series { name: "b<c", points: vec![(0.0, 1.0)] },
        ];
        let svg = line_chart("t", "x", "y", &s);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        let first = svg.lines().find(|l| l.contains("data-series=\"a\"")).unwrap();
        let pts = first.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(pts.split(' ').count(), 3);
    }

    #[test]
    fn empty_chart_is_valid() {
        let svg = line_chart("t", "x", "y", &[]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
