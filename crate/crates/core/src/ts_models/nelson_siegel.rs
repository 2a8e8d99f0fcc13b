use alloc::vec::Vec;

use chrono::NaiveDate;

use super::var::{forecast_var, select_order};
use crate::basis::{design_matrix, ns_curve, BasisSpec};
use crate::curve::{TermGrid, YieldCurve, YieldSeries};
use crate::numerics::{factor_spd, Cholesky, Matrix};
use crate::{Error, Result};

/// Decay rates `0.030, 0.035, …, 0.120` per month.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=18).map(|i| (30 + 5 * i) as f64 / 1000.0).collect()
}

/// Daily level/slope/curvature factors at one shared decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct NsFactorSeries {
    pub dates: Vec<NaiveDate>,
    pub factors: Vec<[f64; 3]>,
    pub lambda: f64,
}

/// Cached normal equations of the Nelson-Siegel design for one `λ`.
///
/// Produces the same coefficients as [`crate::basis::fit_ols`] (same
/// operations in the same order) without rebuilding the design per curve.
#[derive(Debug, Clone)]
pub struct NsProjector {
    lambda: f64,
    design: Matrix,
    chol: Cholesky,
}

impl NsProjector {
    pub fn new(lambda: f64, grid: &TermGrid) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::InsufficientData { needed: 2, available: grid.len() });
        }
        let design = design_matrix(&BasisSpec::NelsonSiegel { lambda }, grid.terms())?;
        let chol = factor_spd(&design.gram(), 0.0).map_err(|_| Error::RankDeficient)?;
        Ok(NsProjector { lambda, design, chol })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factors(&self, yields: &[f64]) -> Result<[f64; 3]> {
        let b = self.chol.solve(&self.design.t_matvec(yields)?)?;
        Ok([b[0], b[1], b[2]])
    }

    pub fn sse(&self, yields: &[f64], factors: &[f64; 3]) -> Result<f64> {
        let fitted = self.design.matvec(factors)?;
        Ok(fitted.iter().zip(yields).map(|(f, y)| (f - y) * (f - y)).sum())
    }
}

/// Grid value with the smallest total SSE over `curves` (first wins ties).
pub fn select_lambda(curves: &[YieldCurve], grid: &TermGrid, lambda_grid: &[f64]) -> Result<f64> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid"));
    }
    if curves.is_empty() {
        return Err(Error::InsufficientData { needed: 0, available: 0 });
    }
    let mut best: Option<(f64, f64)> = None;
    for &lambda in lambda_grid {
        let proj = NsProjector::new(lambda, grid)?;
        let mut total = 0.0;
        for c in curves {
            let f = proj.factors(c.yields())?;
            total += proj.sse(c.yields(), &f)?;
        }
        if best.is_none_or(|(_, b)| total < b) {
            best = Some((lambda, total));
        }
    }
    Ok(best.map(|(l, _)| l).unwrap_or(lambda_grid[0]))
}

/// Per-day factors at a given `λ`.
pub fn extract_ns_factors_at(curves: &[YieldCurve], grid: &TermGrid, lambda: f64) -> Result<NsFactorSeries> {
    let proj = NsProjector::new(lambda, grid)?;
    let factors = curves.iter().map(|c| proj.factors(c.yields())).collect::<Result<Vec<_>>>()?;
    Ok(NsFactorSeries { dates: curves.iter().map(|c| c.date()).collect(), factors, lambda })
}

/// Selects a shared `λ` from `lambda_grid` and extracts daily factors.
pub fn extract_ns_factors(series: &YieldSeries, lambda_grid: &[f64]) -> Result<NsFactorSeries> {
    let lambda = select_lambda(series.curves(), series.grid(), lambda_grid)?;
    extract_ns_factors_at(series.curves(), series.grid(), lambda)
}

/// VAR (BIC order up to `max_order`) on the factors, one step ahead, mapped
/// back to yields on `grid`.
pub fn forecast_dns(factors: &NsFactorSeries, grid: &TermGrid, max_order: usize) -> Result<Vec<f64>> {
    let (order, model) = select_order(&factors.factors, max_order)?;
    let recent = &factors.factors[factors.factors.len() - order..];
    let next = forecast_var(&model, recent)?;
    Ok(ns_curve(factors.lambda, [next[0], next[1], next[2]], grid.terms()))
}
