//! Forecast-record CSV, RMSE report CSV/JSON and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde_json::{json, Map, Value};
use yieldcast_core::backtest::{ComparisonTable, ForecastRecord, Method, RmseReport};
use yieldcast_core::curve::{TermGrid, DEFAULT_TERMS, DEFAULT_TERM_LABELS};

use crate::ingest::parse_date;

pub const SCHEMA_VERSION: u32 = 1;
pub const RECORD_HEADER: [&str; 8] =
    ["date", "method", "term_months", "predicted", "actual", "squared_error", "interval_lo", "interval_hi"];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Display label for a term in months (`"1 Mo"`, `"30 Yr"`, …).
pub fn term_label(months: f64) -> String {
    match DEFAULT_TERMS.iter().position(|t| *t == months) {
        Some(i) => DEFAULT_TERM_LABELS[i].to_string(),
        None => format!("{months} Mo"),
    }
}

fn term_key(months: f64) -> String {
    format!("{months}")
}

/// One row per (day, term), in record order.
pub fn write_records_csv<W: Write>(records: &[ForecastRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let date = r.date.format("%Y-%m-%d").to_string();
        for (j, term) in r.grid.terms().iter().enumerate() {
            let interval = |v: &Option<Vec<f64>>| v.as_ref().map_or(String::new(), |v| format!("{}", v[j]));
            w.write_record([
                date.clone(),
                r.method.name().to_string(),
                term_key(*term),
                format!("{}", r.predicted[j]),
                format!("{}", r.actual[j]),
                format!("{}", r.squared_error[j]),
                interval(&r.interval_lo),
                interval(&r.interval_hi),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum RecordsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {0}: {1}")]
    Invalid(u64, String),
}

/// Inverse of [`write_records_csv`]; rows of one day must be contiguous.
pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ForecastRecord>, RecordsError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out: Vec<ForecastRecord> = Vec::new();
    let mut pending: Option<(u64, ForecastRecord, Vec<f64>)> = None;
    let finish = |(line, mut rec, terms): (u64, ForecastRecord, Vec<f64>)| -> Result<ForecastRecord, RecordsError> {
        rec.grid = TermGrid::new(terms).map_err(|e| RecordsError::Invalid(line, e.to_string()))?;
        Ok(rec)
    };
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str| RecordsError::Invalid(line, what.to_string());
        let field = |i: usize| row.get(i).ok_or_else(|| bad("short row"));
        let num = |i: usize| -> Result<f64, RecordsError> { field(i)?.parse().map_err(|_| bad("not a number")) };
        let opt = |i: usize| -> Result<Option<f64>, RecordsError> {
            let s = field(i)?;
            if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|_| bad("not a number")) }
        };
        let date = chrono::NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d")
            .ok()
            .or_else(|| parse_date(field(0).ok()?))
            .ok_or_else(|| bad("bad date"))?;
        let method: Method = field(1)?.parse().map_err(|_| bad("unknown method"))?;
        let (term, pred, act, se, lo, hi) = (num(2)?, num(3)?, num(4)?, num(5)?, opt(6)?, opt(7)?);
        let same_day = matches!(&pending, Some((_, r, _)) if r.date == date && r.method == method);
        if !same_day {
            if let Some(p) = pending.take() {
                out.push(finish(p)?);
            }
            let rec = ForecastRecord {
                date,
                method,
                grid: TermGrid::default(),
                predicted: Vec::new(),
                actual: Vec::new(),
                squared_error: Vec::new(),
                interval_lo: lo.map(|_| Vec::new()),
                interval_hi: hi.map(|_| Vec::new()),
            };
            pending = Some((line, rec, Vec::new()));
        }
        let (_, rec, terms) = pending.as_mut().expect("pending record");
        terms.push(term);
        rec.predicted.push(pred);
        rec.actual.push(act);
        rec.squared_error.push(se);
        match (&mut rec.interval_lo, lo) {
            (Some(v), Some(x)) => v.push(x),
            (None, None) => {}
            _ => return Err(bad("interval cells present on only some rows of a day")),
        }
        match (&mut rec.interval_hi, hi) {
            (Some(v), Some(x)) => v.push(x),
            (None, None) => {}
            _ => return Err(bad("interval cells present on only some rows of a day")),
        }
    }
    if let Some(p) = pending.take() {
        out.push(finish(p)?);
    }
    Ok(out)
}

/// Side-by-side CSV: one row per term plus a pooled row.
pub fn report_csv(reports: &[RmseReport], table: Option<&ComparisonTable>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["term_months".to_string(), "term".to_string()];
    header.extend(reports.iter().map(|r| r.method.name().to_string()));
    header.push("winner".into());
    w.write_record(&header).expect("in-memory write");
    let terms = reports.first().map_or(&[][..], |r| &r.terms[..]);
    for (j, t) in terms.iter().enumerate() {
        let mut row = vec![term_key(*t), term_label(*t)];
        row.extend(reports.iter().map(|r| format!("{}", r.rmse[j])));
        row.push(table.and_then(|t| t.term_winners[j]).map_or(String::new(), |m| m.name().into()));
        w.write_record(&row).expect("in-memory write");
    }
    let mut pooled = vec!["pooled".to_string(), "all terms".to_string()];
    pooled.extend(reports.iter().map(|r| format!("{}", r.pooled)));
    pooled.push(String::new());
    w.write_record(&pooled).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

/// JSON report keyed method → term (months) → RMSE.
pub fn report_json(
    reports: &[RmseReport],
    table: Option<&ComparisonTable>,
    failures: &BTreeMap<String, String>,
    settings: Value,
) -> Value {
    let mut rmse = Map::new();
    let mut pooled = Map::new();
    let mut n = Map::new();
    for r in reports {
        let per_term: Map<String, Value> = r.terms.iter().zip(&r.rmse).map(|(t, v)| (term_key(*t), json!(v))).collect();
        rmse.insert(r.method.name().into(), Value::Object(per_term));
        pooled.insert(r.method.name().into(), json!(r.pooled));
        n.insert(r.method.name().into(), json!(r.n));
    }
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("settings".into(), settings);
    if let Some(first) = reports.first() {
        doc.insert("first_date".into(), json!(first.first_date.to_string()));
        doc.insert("last_date".into(), json!(first.last_date.to_string()));
        doc.insert("terms".into(), json!(first.terms));
        doc.insert("term_labels".into(), json!(first.terms.iter().map(|t| term_label(*t)).collect::<Vec<_>>()));
    }
    doc.insert("n".into(), Value::Object(n));
    doc.insert("rmse".into(), Value::Object(rmse));
    doc.insert("pooled_rmse".into(), Value::Object(pooled));
    if let Some(t) = table {
        let winners: Map<String, Value> = t
            .terms
            .iter()
            .zip(&t.term_winners)
            .map(|(term, w)| (term_key(*term), w.map_or(Value::Null, |m| json!(m.name()))))
            .collect();
        doc.insert("term_winners".into(), Value::Object(winners));
        let regions: Map<String, Value> =
            t.region_winners.iter().map(|(r, w)| (r.name().into(), w.map_or(Value::Null, |m| json!(m.name())))).collect();
        doc.insert("region_winners".into(), Value::Object(regions));
    }
    if !failures.is_empty() {
        doc.insert("failures".into(), json!(failures));
    }
    Value::Object(doc)
}

/// Fixed-width text table for the terminal.
pub fn render_table(reports: &[RmseReport], table: Option<&ComparisonTable>) -> String {
    let mut s = format!("{:<10}", "Term");
    for r in reports {
        s += &format!("{:>10}", r.method.name().to_uppercase());
    }
    s += "  winner\n";
    let terms = reports.first().map_or(&[][..], |r| &r.terms[..]);
    for (j, t) in terms.iter().enumerate() {
        s += &format!("{:<10}", term_label(*t));
        for r in reports {
            s += &format!("{:>10.3}", r.rmse[j]);
        }
        if let Some(w) = table.and_then(|t| t.term_winners[j]) {
            s += &format!("  {}", w.name());
        }
        s.push('\n');
    }
    s += &format!("{:<10}", "pooled");
    for r in reports {
        s += &format!("{:>10.3}", r.pooled);
    }
    s.push('\n');
    if let Some(t) = table {
        for (region, w) in &t.region_winners {
            s += &format!("{} region winner: {}\n", region.name(), w.map_or("tie", |m| m.name()));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use yieldcast_core::backtest::rmse_per_term;
    use yieldcast_core::curve::YieldCurve;

    fn rec(day: u32, err: f64, gp: bool) -> ForecastRecord {
        let d = chrono::NaiveDate::from_ymd_opt(2010, 3, day).unwrap();
        let actual = YieldCurve::new(d, (0..11).map(|i| 1.0 + 0.3 * i as f64).collect()).unwrap();
        let pred = actual.yields().iter().map(|v| v + err / 3.0).collect();
        let method = if gp { Method::Gp } else { Method::Mvts };
        let mut r = ForecastRecord::new(method, TermGrid::default(), pred, &actual).unwrap();
        if gp {
            r.interval_lo = Some(r.predicted.iter().map(|v| v - 0.1).collect());
            r.interval_hi = Some(r.predicted.iter().map(|v| v + 0.1).collect());
        }
        r
    }

    #[test]
    fn records_round_trip() {
        for gp in [true, false] {
            let recs = vec![rec(1, 0.1, gp), rec(2, -0.07, gp), rec(3, 0.013, gp)];
            let mut buf = Vec::new();
            write_records_csv(&recs, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert_eq!(text.lines().count(), 1 + 33);
            assert!(text.starts_with("date,method,term_months,predicted,actual,squared_error,interval_lo,interval_hi\n"));
            assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
        }
    }

    #[test]
    fn json_is_keyed_by_method_and_term() {
        let r = rmse_per_term(&[rec(1, 0.1, false)]).unwrap();
        let v = report_json(&[r], None, &BTreeMap::new(), json!({}));
        assert_eq!(v["schema_version"], 1);
        assert!((v["rmse"]["mvts"]["360"].as_f64().unwrap() - 0.1 / 3.0).abs() < 1e-12);
        assert_eq!(v["rmse"]["mvts"].as_object().unwrap().len(), 11);
    }

    #[test]
    fn csv_has_term_rows() {
        let r = rmse_per_term(&[rec(1, 0.1, false)]).unwrap();
        let text = report_csv(&[r], None);
        assert_eq!(text.lines().count(), 1 + 11 + 1);
        assert!(text.lines().nth(1).unwrap().starts_with("1,1 Mo,"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
