//! Treasury par-yield CSV parsing and the canonical writer.

use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use yieldcast_core::curve::{TermGrid, YieldCurve, YieldSeries, DEFAULT_TERM_LABELS, MAX_YIELD, MIN_YIELD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingDataPolicy {
    /// Skip any row with a missing term.
    #[default]
    DropRow,
    /// Reuse the most recent earlier value of the same column.
    ForwardFill,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: missing column \"{0}\"")]
    MalformedHeader(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("no usable rows in input")]
    EmptySeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: YieldSeries,
    pub rows_read: usize,
    pub dropped: usize,
    pub filled_cells: usize,
}

/// Parses `MM/DD/YY` or `MM/DD/YYYY`; two-digit years from 70 map to 19xx.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let mut it = s.trim().split('/');
    let month: u32 = it.next()?.trim().parse().ok()?;
    let day: u32 = it.next()?.trim().parse().ok()?;
    let year_str = it.next()?.trim();
    if it.next().is_some() {
        return None;
    }
    let year: i32 = match year_str.len() {
        2 => {
            let yy: i32 = year_str.parse().ok()?;
            if yy >= 70 { 1900 + yy } else { 2000 + yy }
        }
        4 => year_str.parse().ok()?,
        _ => return None,
    };
    NaiveDate::from_ymd_opt(year, month, day)
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim().to_ascii_uppercase().as_str(), "" | "N/A" | "NA" | "ND")
}

struct RawRow {
    line: u64,
    date: NaiveDate,
    cells: Vec<Option<f64>>,
}

pub fn parse_treasury_csv<R: Read>(input: R, policy: MissingDataPolicy) -> Result<Ingested, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(csv_io)?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name));
    let date_col = find("Date").ok_or_else(|| IngestError::MalformedHeader("Date".into()))?;
    let term_cols = DEFAULT_TERM_LABELS
        .iter()
        .map(|label| find(label).ok_or_else(|| IngestError::MalformedHeader((*label).into())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_io)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let bad = |reason: String| IngestError::MalformedRow { line, reason };
        let date_cell = rec.get(date_col).unwrap_or("");
        let date = parse_date(date_cell).ok_or_else(|| bad(format!("unparseable date \"{date_cell}\"")))?;
        let mut cells = Vec::with_capacity(term_cols.len());
        for (&col, label) in term_cols.iter().zip(DEFAULT_TERM_LABELS) {
            let cell = rec.get(col).unwrap_or("");
            if is_missing(cell) {
                cells.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| bad(format!("column \"{label}\": not a number \"{cell}\"")))?;
            if !v.is_finite() || !(MIN_YIELD..=MAX_YIELD).contains(&v) {
                return Err(bad(format!("column \"{label}\": yield {v} outside [{MIN_YIELD}, {MAX_YIELD}]")));
            }
            cells.push(Some(v));
        }
        rows.push(RawRow { line, date, cells });
    }
    rows.sort_by_key(|r| r.date);
    for pair in rows.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(IngestError::MalformedRow { line: pair[1].line, reason: format!("duplicate date {}", pair[1].date) });
        }
    }

    let rows_read = rows.len();
    let mut dropped = 0;
    let mut filled_cells = 0;
    let mut last: Vec<Option<f64>> = vec![None; DEFAULT_TERM_LABELS.len()];
    let mut curves = Vec::with_capacity(rows.len());
    for row in rows {
        let yields = match policy {
            MissingDataPolicy::DropRow => match row.cells.iter().copied().collect::<Option<Vec<f64>>>() {
                Some(y) => y,
                None => {
                    dropped += 1;
                    continue;
                }
            },
            MissingDataPolicy::ForwardFill => {
                let mut y = Vec::with_capacity(row.cells.len());
                for (j, cell) in row.cells.iter().enumerate() {
                    match cell.or(last[j]) {
                        Some(v) => {
                            if cell.is_none() {
                                filled_cells += 1;
                            }
                            last[j] = Some(v);
                            y.push(v);
                        }
                        None => {
                            return Err(IngestError::MalformedRow {
                                line: row.line,
                                reason: format!("column \"{}\" is empty with no earlier value", DEFAULT_TERM_LABELS[j]),
                            })
                        }
                    }
                }
                y
            }
        };
        let curve = YieldCurve::new(row.date, yields)
            .map_err(|e| IngestError::MalformedRow { line: row.line, reason: e.to_string() })?;
        curves.push(curve);
    }
    if curves.is_empty() {
        return Err(IngestError::EmptySeries);
    }
    let series = YieldSeries::new(TermGrid::default(), curves).map_err(|e| IngestError::MalformedRow { line: 0, reason: e.to_string() })?;
    Ok(Ingested { series, rows_read, dropped, filled_cells })
}

fn csv_io(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::MalformedRow { line, reason: format!("{other:?}") },
    }
}

/// `MM/DD/YYYY`.
pub fn format_date(d: NaiveDate) -> String {
    format!("{:02}/{:02}/{:04}", d.month(), d.day(), d.year())
}

/// Shortest decimal with at least two places that parses back to `v`.
pub fn format_yield(v: f64) -> String {
    let s = format!("{v}");
    match s.find('.') {
        None => format!("{v:.2}"),
        Some(dot) if s.len() - dot - 1 < 2 => format!("{v:.2}"),
        Some(_) => s,
    }
}

/// Writes the Treasury header layout for the default grid.
pub fn write_canonical_csv<W: Write>(series: &YieldSeries, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["Date"];
    header.extend(DEFAULT_TERM_LABELS);
    w.write_record(&header)?;
    for c in series.curves() {
        let mut row = vec![format_date(c.date())];
        row.extend(c.yields().iter().map(|v| format_yield(*v)));
        w.write_record(&row)?;
    }
    w.flush()
}
