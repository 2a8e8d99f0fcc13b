use alloc::vec::Vec;

use super::{Matrix, SymMatrix};
use crate::{Error, Result};

/// Relative jitter rungs tried by [`factor_spd`], as multiples of the mean
/// diagonal.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = a + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
    jitter: f64,
}

/// Single factorization attempt of `a + jitter·I`.
///
/// A pivot at or below `n·ε·max(diag)` counts as a failure, so exactly
/// singular inputs are rejected instead of yielding a factor with a
/// round-off sized pivot.
pub fn cholesky_spd(a: &SymMatrix, jitter: f64) -> Result<Cholesky> {
    if !(jitter >= 0.0) || !jitter.is_finite() {
        return Err(Error::InvalidParameter("jitter must be finite and non-negative"));
    }
    let n = a.order();
    let max_diag = a.diag().iter().fold(0.0_f64, |m, d| m.max(d + jitter));
    let tol = n as f64 * f64::EPSILON * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d <= tol {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = libm::sqrt(d);
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(Cholesky { l, jitter })
}

/// Factors `a + jitter·I`, escalating through [`JITTER_LADDER`] before
/// giving up with [`Error::NotPositiveDefinite`].
pub fn factor_spd(a: &SymMatrix, jitter: f64) -> Result<Cholesky> {
    let scale = a.mean_diag();
    let mut last = Error::NotPositiveDefinite;
    for (i, rung) in JITTER_LADDER.iter().enumerate() {
        if i > 0 && !(scale > 0.0 && scale.is_finite()) {
            break;
        }
        match cholesky_spd(a, jitter + rung * scale) {
            Ok(c) => return Ok(c),
            Err(e) => last = e,
        }
    }
    Err(last)
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Total diagonal jitter that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L·z = b`.
    pub fn forward(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.l.row(i);
            let s = b[i] - super::dot(&row[..i], &z);
            z.push(s / row[i]);
        }
        Ok(z)
    }

    /// Solves `Lᵀ·x = z` in place.
    fn backward_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
    }

    /// Solves `(a + jitter·I)·x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.forward(b)?;
        self.backward_in_place(&mut x);
        Ok(x)
    }

    /// Applies `L⁻¹` to every column of `b`.
    pub fn forward_matrix(&self, b: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let z = self.forward(&b.column(j))?;
            for (i, v) in z.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    /// `log det(a + jitter·I) = 2·Σ log Lᵢᵢ`.
    pub fn log_det(&self) -> f64 {
        (0..self.order()).map(|i| 2.0 * libm::log(self.l[(i, i)])).sum()
    }
}

/// Solves `(a + jitter·I)·x = b` through [`factor_spd`].
pub fn spd_solve(a: &SymMatrix, b: &[f64], jitter: f64) -> Result<Vec<f64>> {
    if b.len() != a.order() {
        return Err(Error::DimensionMismatch { expected: a.order(), found: b.len() });
    }
    factor_spd(a, jitter)?.solve(b)
}

/// Ordinary least squares through the normal equations `(XᵀX)β = Xᵀy`.
pub fn ols_solve(design: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if design.rows() < design.cols() {
        return Err(Error::InsufficientData { needed: design.cols() - 1, available: design.rows() });
    }
    let rhs = design.t_matvec(y)?;
    let chol = factor_spd(&design.gram(), 0.0).map_err(|e| match e {
        Error::NotPositiveDefinite => Error::RankDeficient,
        other => other,
    })?;
    chol.solve(&rhs)
}
