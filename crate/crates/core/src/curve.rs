//! Yield-curve containers: the maturity grid, one day's curve, and a
//! date-ordered series of curves.

use alloc::sync::Arc;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::{Error, Result};

/// Lowest yield (percent) accepted as a plausible observation.
pub const MIN_YIELD: f64 = -2.0;
/// Highest yield (percent) accepted as a plausible observation.
pub const MAX_YIELD: f64 = 25.0;

/// The 11 standard Treasury par-curve maturities, in months.
pub const DEFAULT_TERMS: [f64; 11] = [1.0, 3.0, 6.0, 12.0, 24.0, 36.0, 60.0, 84.0, 120.0, 240.0, 360.0];

/// Column labels used by Treasury files for [`DEFAULT_TERMS`].
pub const DEFAULT_TERM_LABELS: [&str; 11] =
    ["1 Mo", "3 Mo", "6 Mo", "1 Yr", "2 Yr", "3 Yr", "5 Yr", "7 Yr", "10 Yr", "20 Yr", "30 Yr"];

/// Strictly increasing maturities in months.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGrid(Arc<[f64]>);

impl TermGrid {
    pub fn new(terms: Vec<f64>) -> Result<Self> {
        let ok = !terms.is_empty()
            && terms.iter().all(|t| t.is_finite() && *t >= 0.0)
            && terms.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidGrid);
        }
        Ok(TermGrid(terms.into()))
    }

    pub fn terms(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

impl Default for TermGrid {
    fn default() -> Self {
        TermGrid(Arc::from(&DEFAULT_TERMS[..]))
    }
}

/// One day's yields (percent per annum) on a [`TermGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct YieldCurve {
    date: NaiveDate,
    yields: Vec<f64>,
}

impl YieldCurve {
    /// Validates finiteness and the `[MIN_YIELD, MAX_YIELD]` sanity bounds.
    pub fn new(date: NaiveDate, yields: Vec<f64>) -> Result<Self> {
        for &y in &yields {
            if !y.is_finite() || !(MIN_YIELD..=MAX_YIELD).contains(&y) {
                return Err(Error::YieldOutOfBounds { date, value: y });
            }
        }
        Ok(YieldCurve { date, yields })
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn yields(&self) -> &[f64] {
        &self.yields
    }

    pub fn len(&self) -> usize {
        self.yields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yields.is_empty()
    }
}

/// Date-ascending curves sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldSeries {
    grid: TermGrid,
    curves: Vec<YieldCurve>,
}

impl YieldSeries {
    /// Validates grid agreement and strictly increasing dates.
    pub fn new(grid: TermGrid, curves: Vec<YieldCurve>) -> Result<Self> {
        for c in &curves {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch { date: c.date });
            }
        }
        for w in curves.windows(2) {
            if w[0].date >= w[1].date {
                return Err(Error::UnorderedDates { prev: w[0].date, next: w[1].date });
            }
        }
        Ok(YieldSeries { grid, curves })
    }

    /// Sorts by date first; duplicate dates are still rejected.
    pub fn from_unsorted(grid: TermGrid, mut curves: Vec<YieldCurve>) -> Result<Self> {
        curves.sort_by_key(|c| c.date);
        YieldSeries::new(grid, curves)
    }

    pub fn grid(&self) -> &TermGrid {
        &self.grid
    }

    pub fn curves(&self) -> &[YieldCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.curves.iter().map(|c| c.date)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.curves.binary_search_by_key(&date, |c| c.date).ok()
    }

    /// Contiguous sub-series `[start, start + length)`.
    pub fn window(&self, start: usize, length: usize) -> Result<YieldSeries> {
        let out_of_range = Error::OutOfRange { start, len: length, available: self.len() };
        if length == 0 {
            return Err(out_of_range);
        }
        let end = start.checked_add(length).ok_or(out_of_range.clone())?;
        if end > self.len() {
            return Err(out_of_range);
        }
        Ok(YieldSeries { grid: self.grid.clone(), curves: self.curves[start..end].to_vec() })
    }

    /// Yields as a `len × terms` row-major table.
    pub fn yield_rows(&self) -> Vec<Vec<f64>> {
        self.curves.iter().map(|c| c.yields.clone()).collect()
    }
}
