use alloc::vec::Vec;

use crate::numerics::{cholesky_spd, factor_spd, Matrix, SymMatrix};
use crate::{Error, Result};

/// `yᵢ = c + A₁yᵢ₋₁ + … + A_k yᵢ₋ₖ + εᵢ`, fitted equation by equation.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub dim: usize,
    pub order: usize,
    pub intercept: Vec<f64>,
    /// `A₁ … A_k`; row `r` of `Aⱼ` holds equation `r`'s lag-`j` coefficients.
    pub coefficient_matrices: Vec<Matrix>,
    /// `EᵀE / n_eff`.
    pub residual_cov: SymMatrix,
    /// Rows used in the regression, `T − k`.
    pub n_eff: usize,
}

/// Smallest `T` for which an order-`order` VAR in `dim` variables is fitted.
pub fn min_observations(dim: usize, order: usize) -> usize {
    order + dim * order + 2
}

fn rows_dim<R: AsRef<[f64]>>(data: &[R]) -> Result<usize> {
    let dim = data.first().map_or(0, |r| r.as_ref().len());
    if dim == 0 {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    for r in data {
        if r.as_ref().len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.as_ref().len() });
        }
    }
    Ok(dim)
}

/// Least-squares VAR(`order`) on `data` (one row per time step, oldest first).
pub fn fit_var<R: AsRef<[f64]>>(data: &[R], order: usize) -> Result<VarModel> {
    if order == 0 {
        return Err(Error::InvalidParameter("VAR order must be at least 1"));
    }
    let dim = rows_dim(data)?;
    let t = data.len();
    if t < min_observations(dim, order) {
        return Err(Error::InsufficientData { needed: order + dim * order + 1, available: t });
    }
    let n_eff = t - order;
    let p = 1 + dim * order;
    let x = Matrix::from_fn(n_eff, p, |i, j| {
        if j == 0 {
            1.0
        } else {
            let lag = (j - 1) / dim + 1;
            data[order + i - lag].as_ref()[(j - 1) % dim]
        }
    });
    let chol = factor_spd(&x.gram(), 0.0).map_err(|e| match e {
        Error::NotPositiveDefinite => Error::RankDeficient,
        other => other,
    })?;
    // one solve per equation; column r of B holds equation r
    let mut b = Matrix::zeros(p, dim);
    for r in 0..dim {
        let yr: Vec<f64> = (0..n_eff).map(|i| data[order + i].as_ref()[r]).collect();
        let coef = chol.solve(&x.t_matvec(&yr)?)?;
        for (j, c) in coef.into_iter().enumerate() {
            b[(j, r)] = c;
        }
    }
    let intercept = b.row(0).to_vec();
    let coefficient_matrices = (0..order)
        .map(|l| Matrix::from_fn(dim, dim, |r, c| b[(1 + l * dim + c, r)]))
        .collect();

    let fitted = x.matmul(&b)?;
    let resid = Matrix::from_fn(n_eff, dim, |i, r| data[order + i].as_ref()[r] - fitted[(i, r)]);
    let g = resid.gram();
    let residual_cov = SymMatrix::from_fn(dim, |i, j| g.get(i, j) / n_eff as f64);
    Ok(VarModel { dim, order, intercept, coefficient_matrices, residual_cov, n_eff })
}

/// Schwarz criterion `log det Σ̂ + (ln n / n)·dim·(dim·k + 1)`.
///
/// A singular residual covariance gives `−∞`.
pub fn bic(model: &VarModel) -> f64 {
    let n = model.n_eff as f64;
    let params = (model.dim * (model.dim * model.order + 1)) as f64;
    let log_det = match cholesky_spd(&model.residual_cov, 0.0) {
        Ok(c) => c.log_det(),
        Err(_) => f64::NEG_INFINITY,
    };
    log_det + libm::log(n) / n * params
}

/// Index of the smallest value, preferring earlier entries unless a later
/// one is lower by more than `1e-12`. NaN never wins.
pub(crate) fn argmin_prefer_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let b = values[best];
        if b.is_nan() && !v.is_nan() || *v < b - 1e-12 {
            best = i;
        }
    }
    best
}

/// BIC order selection over `1..=max_order`.
///
/// Every candidate is scored on the same sample (the first `max_order` rows
/// only serve as lags); the winner is then refitted on all of `data`.
pub fn select_order<R: AsRef<[f64]>>(data: &[R], max_order: usize) -> Result<(usize, VarModel)> {
    if max_order == 0 {
        return Err(Error::InvalidParameter("max_order must be at least 1"));
    }
    let dim = rows_dim(data)?;
    if data.len() < min_observations(dim, max_order) {
        return Err(Error::InsufficientData { needed: max_order + dim * max_order + 1, available: data.len() });
    }
    let mut scores = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let model = fit_var(&data[max_order - k..], k)?;
        scores.push(bic(&model));
    }
    let order = argmin_prefer_first(&scores) + 1;
    Ok((order, fit_var(data, order)?))
}

/// One-step forecast from the last `order` rows (newest last).
pub fn forecast_var<R: AsRef<[f64]>>(model: &VarModel, recent: &[R]) -> Result<Vec<f64>> {
    if recent.len() != model.order {
        return Err(Error::DimensionMismatch { expected: model.order, found: recent.len() });
    }
    let mut out = model.intercept.clone();
    for (j, a) in model.coefficient_matrices.iter().enumerate() {
        let lagged = recent[model.order - 1 - j].as_ref();
        if lagged.len() != model.dim {
            return Err(Error::DimensionMismatch { expected: model.dim, found: lagged.len() });
        }
        for (o, v) in out.iter_mut().zip(a.matvec(lagged)?) {
            *o += v;
        }
    }
    Ok(out)
}
