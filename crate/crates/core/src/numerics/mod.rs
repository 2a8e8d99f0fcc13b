//! Dense linear algebra, optimization and quadrature primitives.
//!
//! Matrices here are small (the yield grid has 11 terms and the largest VAR
//! regression has a few dozen regressors), so everything is plain row-major
//! storage with straightforward loops.

mod cholesky;
mod matrix;
mod normal;
mod optimize;
mod quadrature;

pub use cholesky::{cholesky_spd, factor_spd, ols_solve, spd_solve, Cholesky, JITTER_LADDER};
pub use matrix::{Matrix, SymMatrix, SYMMETRY_TOL};
pub use normal::standard_normal_quantile;
pub use optimize::{minimize, minimize_multistart, Minimum, OptimConfig};
pub use quadrature::simpson;

/// Largest absolute entry of a slice (0 for an empty slice).
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(libm::fabs(*x)))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
