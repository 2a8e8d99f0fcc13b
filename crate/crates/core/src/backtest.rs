//! Rolling-window one-step-ahead evaluation and per-term RMSE reports.
//!
//! The VAR methods forecast day `d` from the `window_days` curves
//! immediately before it. The GP filter runs sequentially from the start of
//! the series and its pre-observation forecast for day `d` is recorded, so
//! all methods are scored on the same dates.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;

use crate::curve::{TermGrid, YieldCurve, YieldSeries};
use crate::dynamic_gp::{self, DgpConfig};
use crate::ts_models::{
    default_lambda_grid, extract_ns_factors_at, forecast_dns, forecast_var, min_observations, select_lambda,
    select_order,
};
use crate::{Error, Result};

/// Region boundaries in months: short is `≤ 12`, medium `≤ 60`, long above.
pub const SHORT_MAX_MONTHS: f64 = 12.0;
pub const MEDIUM_MAX_MONTHS: f64 = 60.0;
/// RMSE differences at or below this count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Dynamic GP filter.
    Gp,
    /// VAR on the raw term yields.
    Mvts,
    /// VAR on daily Nelson-Siegel factors.
    Tsns,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gp, Method::Mvts, Method::Tsns];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gp => "gp",
            Method::Mvts => "mvts",
            Method::Tsns => "tsns",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gp" => Ok(Method::Gp),
            "mvts" => Ok(Method::Mvts),
            "tsns" => Ok(Method::Tsns),
            _ => Err(Error::InvalidParameter("unknown method")),
        }
    }
}

/// How the Nelson-Siegel decay rate is chosen for each forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSelection {
    /// Grid search on every training window.
    PerWindow,
    /// One value for the whole run.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub method: Method,
    pub window_days: usize,
    /// First evaluated series index; defaults to `window_days`.
    pub start_index: Option<usize>,
    /// Last evaluated series index (inclusive); defaults to the last curve.
    pub end_index: Option<usize>,
    pub dgp: DgpConfig,
    pub k_max: usize,
    pub lambda_grid: Vec<f64>,
    pub lambda: LambdaSelection,
}

impl BacktestConfig {
    pub fn new(method: Method) -> Self {
        BacktestConfig {
            method,
            window_days: 250,
            start_index: None,
            end_index: None,
            dgp: DgpConfig::default(),
            k_max: 5,
            lambda_grid: default_lambda_grid(),
            lambda: LambdaSelection::PerWindow,
        }
    }

    /// Smallest window the method can be trained on.
    pub fn min_window(&self, grid_len: usize) -> usize {
        match self.method {
            Method::Gp => 1,
            Method::Mvts => min_observations(grid_len, self.k_max),
            Method::Tsns => min_observations(3, self.k_max),
        }
    }

    /// Inclusive evaluation range for a series of `len` curves.
    pub fn eval_range(&self, len: usize, grid_len: usize) -> Result<(usize, usize)> {
        if self.window_days == 0 {
            return Err(Error::InvalidParameter("window_days must be positive"));
        }
        if self.method != Method::Gp && self.k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be at least 1"));
        }
        let min = self.min_window(grid_len);
        if self.window_days < min {
            return Err(Error::InsufficientData { needed: min - 1, available: self.window_days });
        }
        if len <= self.window_days {
            return Err(Error::InsufficientData { needed: self.window_days, available: len });
        }
        let start = self.start_index.unwrap_or(self.window_days);
        let end = self.end_index.unwrap_or(len - 1);
        if start < self.window_days || end >= len || start > end {
            return Err(Error::OutOfRange { start, len: end.saturating_sub(start) + 1, available: len });
        }
        Ok((start, end))
    }
}

/// One evaluated day.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub date: NaiveDate,
    pub method: Method,
    pub grid: TermGrid,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
    pub squared_error: Vec<f64>,
    pub interval_lo: Option<Vec<f64>>,
    pub interval_hi: Option<Vec<f64>>,
}

impl ForecastRecord {
    pub fn new(method: Method, grid: TermGrid, predicted: Vec<f64>, actual: &YieldCurve) -> Result<Self> {
        if predicted.len() != grid.len() || actual.len() != grid.len() {
            return Err(Error::GridMismatch { date: actual.date() });
        }
        let squared_error = predicted.iter().zip(actual.yields()).map(|(p, a)| (p - a) * (p - a)).collect();
        Ok(ForecastRecord {
            date: actual.date(),
            method,
            grid,
            predicted,
            actual: actual.yields().to_vec(),
            squared_error,
            interval_lo: None,
            interval_hi: None,
        })
    }
}

/// One-step forecast of the curve following `window` (oldest first).
///
/// Only the VAR methods are window-based; the GP filter is not.
pub fn forecast_window(window: &[YieldCurve], grid: &TermGrid, config: &BacktestConfig) -> Result<Vec<f64>> {
    match config.method {
        Method::Mvts => {
            let rows: Vec<&[f64]> = window.iter().map(|c| c.yields()).collect();
            let (order, model) = select_order(&rows, config.k_max)?;
            forecast_var(&model, &rows[rows.len() - order..])
        }
        Method::Tsns => {
            let lambda = match config.lambda {
                LambdaSelection::PerWindow => select_lambda(window, grid, &config.lambda_grid)?,
                LambdaSelection::Fixed(l) => l,
            };
            let factors = extract_ns_factors_at(window, grid, lambda)?;
            forecast_dns(&factors, grid, config.k_max)
        }
        Method::Gp => Err(Error::InvalidParameter("the GP filter is not window-based")),
    }
}

/// Record for series index `day` of a window-based method.
pub fn forecast_day(series: &YieldSeries, day: usize, config: &BacktestConfig) -> Result<ForecastRecord> {
    let curves = series.curves();
    if day < config.window_days || day >= curves.len() {
        return Err(Error::OutOfRange { start: day, len: 1, available: curves.len() });
    }
    let predicted = forecast_window(&curves[day - config.window_days..day], series.grid(), config)?;
    ForecastRecord::new(config.method, series.grid().clone(), predicted, &curves[day])
}

/// GP records for series indices `start..=end`.
pub fn gp_records(series: &YieldSeries, start: usize, end: usize, dgp: &DgpConfig) -> Result<Vec<ForecastRecord>> {
    let prefix = series.window(0, end + 1)?;
    let curves = series.curves();
    let mut out = Vec::with_capacity(end + 1 - start);
    let mut failure = None;
    dynamic_gp::run_filter_with(&prefix, dgp, |_, f| {
        if f.for_step < start || failure.is_some() {
            return;
        }
        match ForecastRecord::new(Method::Gp, series.grid().clone(), f.mean.clone(), &curves[f.for_step]) {
            Ok(mut r) => {
                r.interval_lo = Some(f.interval_lo.clone());
                r.interval_hi = Some(f.interval_hi.clone());
                out.push(r);
            }
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Runs the configured method over the evaluation range, in date order.
pub fn rolling_backtest(series: &YieldSeries, config: &BacktestConfig) -> Result<Vec<ForecastRecord>> {
    let (start, end) = config.eval_range(series.len(), series.grid().len())?;
    match config.method {
        Method::Gp => gp_records(series, start, end, &config.dgp),
        _ => (start..=end).map(|d| forecast_day(series, d, config)).collect(),
    }
}

/// Per-term RMSE of one method over a set of days.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub method: Method,
    pub terms: Vec<f64>,
    pub rmse: Vec<f64>,
    /// `sqrt(Σ_days Σ_terms err² / N)`.
    pub pooled: f64,
    pub n: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

pub fn rmse_per_term(records: &[ForecastRecord]) -> Result<RmseReport> {
    let first = records.first().ok_or(Error::EmptyRecords)?;
    let m = first.grid.len();
    let mut sums = vec![0.0; m];
    let mut first_date = first.date;
    let mut last_date = first.date;
    for r in records {
        if r.method != first.method {
            return Err(Error::InvalidParameter("records mix methods"));
        }
        if r.squared_error.len() != m || r.grid.terms() != first.grid.terms() {
            return Err(Error::GridMismatch { date: r.date });
        }
        for (s, e) in sums.iter_mut().zip(&r.squared_error) {
            *s += e;
        }
        first_date = first_date.min(r.date);
        last_date = last_date.max(r.date);
    }
    let n = records.len() as f64;
    let pooled = libm::sqrt(sums.iter().sum::<f64>() / n);
    Ok(RmseReport {
        method: first.method,
        terms: first.grid.terms().to_vec(),
        rmse: sums.iter().map(|s| libm::sqrt(s / n)).collect(),
        pooled,
        n: records.len(),
        first_date,
        last_date,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Short,
    Medium,
    Long,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Short, Region::Medium, Region::Long];

    pub fn of(term_months: f64) -> Region {
        if term_months <= SHORT_MAX_MONTHS {
            Region::Short
        } else if term_months <= MEDIUM_MAX_MONTHS {
            Region::Medium
        } else {
            Region::Long
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Short => "short",
            Region::Medium => "medium",
            Region::Long => "long",
        }
    }
}

/// Side-by-side RMSE with winners; a winner is `None` when the best two are
/// within [`TIE_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub methods: Vec<Method>,
    pub terms: Vec<f64>,
    /// `rmse[i][j]`: method `i`, term `j`.
    pub rmse: Vec<Vec<f64>>,
    pub term_winners: Vec<Option<Method>>,
    /// Winner by mean RMSE over the region's terms.
    pub region_winners: Vec<(Region, Option<Method>)>,
    pub n: usize,
}

fn unique_min(values: &[f64]) -> Option<usize> {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let tied = values.iter().enumerate().any(|(i, v)| i != best && *v - values[best] <= TIE_TOL);
    (!tied).then_some(best)
}

pub fn compare_report(reports: &[RmseReport]) -> Result<ComparisonTable> {
    let first = reports.first().ok_or(Error::EmptyRecords)?;
    for r in reports {
        if r.n != first.n || r.first_date != first.first_date || r.last_date != first.last_date || r.terms != first.terms {
            return Err(Error::MismatchedRanges);
        }
    }
    let methods: Vec<Method> = reports.iter().map(|r| r.method).collect();
    let rmse: Vec<Vec<f64>> = reports.iter().map(|r| r.rmse.clone()).collect();
    let term_winners = (0..first.terms.len())
        .map(|j| {
            let col: Vec<f64> = rmse.iter().map(|row| row[j]).collect();
            unique_min(&col).map(|i| methods[i])
        })
        .collect();
    let region_winners = Region::ALL
        .iter()
        .filter_map(|&region| {
            let idx: Vec<usize> = (0..first.terms.len()).filter(|&j| Region::of(first.terms[j]) == region).collect();
            if idx.is_empty() {
                return None;
            }
            let means: Vec<f64> =
                rmse.iter().map(|row| idx.iter().map(|&j| row[j]).sum::<f64>() / idx.len() as f64).collect();
            Some((region, unique_min(&means).map(|i| methods[i])))
        })
        .collect();
    Ok(ComparisonTable { methods, terms: first.terms.clone(), rmse, term_winners, region_winners, n: first.n })
}
