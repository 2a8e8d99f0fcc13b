//! Functional bases for a single yield curve and least-squares fits on them.
//!
//! A curve is represented as `f(τ) = Σₖ βₖ φₖ(τ)` with τ in months. Four
//! families are available; every family starts with the constant function,
//! so a penalty on curvature never touches the level. Coefficients come
//! from ordinary least squares or from the roughness-penalized normal
//! equations `(ΦᵀΦ + λR₂)β = Φᵀy`, where `R₂` integrates products of second
//! derivatives over the maturity range.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curve::TermGrid;
use crate::numerics::{factor_spd, ols_solve, simpson, Matrix, SymMatrix};
use crate::{Error, Result};

/// Simpson panels used for the roughness penalty integrals.
pub const R2_PANELS: usize = 200;

/// Below this value of `λτ` the Nelson-Siegel slope loading is its limit 1.
const NS_SMALL_ARG: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    /// `1, sin(ωτ), cos(ωτ), …, sin(nωτ), cos(nωτ)` with `ω = 2π/period`.
    Fourier { period: f64, pairs: usize },
    /// Level, slope and curvature loadings with decay `lambda` per month.
    NelsonSiegel { lambda: f64 },
    /// `1, e^{r₁τ}, e^{r₂τ}, …`.
    Exponential { rates: Vec<f64> },
    /// `1, e^{−w(τ−c₁)²}, e^{−w(τ−c₂)²}, …`.
    GaussianRbf { centers: Vec<f64>, width: f64 },
}

/// Nelson-Siegel slope and curvature loadings `(f₁, f₂)` at maturity `tau`.
pub fn ns_loadings(lambda: f64, tau: f64) -> (f64, f64) {
    let x = lambda * tau;
    if x < NS_SMALL_ARG {
        return (1.0, 0.0);
    }
    let f1 = -libm::expm1(-x) / x;
    (f1, f1 - libm::exp(-x))
}

/// Second derivative in `x` of `g(x) = (1 − e^{−x})/x`.
fn ns_slope_curvature(x: f64) -> f64 {
    if x < 0.05 {
        // Taylor series of g''; truncation error below 1e-11 here
        let c = [1.0 / 3.0, -1.0 / 4.0, 1.0 / 10.0, -1.0 / 36.0, 1.0 / 168.0, -1.0 / 960.0];
        return c.iter().rev().fold(0.0, |acc, k| acc * x + k);
    }
    let e = libm::exp(-x);
    -e / x - 2.0 * e / (x * x) - 2.0 * libm::expm1(-x) / (x * x * x)
}

impl BasisSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            BasisSpec::Fourier { period, pairs } => period.is_finite() && *period > 0.0 && *pairs >= 1,
            BasisSpec::NelsonSiegel { lambda } => lambda.is_finite() && *lambda > 0.0,
            BasisSpec::Exponential { rates } => !rates.is_empty() && rates.iter().all(|r| r.is_finite()),
            BasisSpec::GaussianRbf { centers, width } => {
                !centers.is_empty() && centers.iter().all(|c| c.is_finite()) && width.is_finite() && *width > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("invalid basis specification"))
        }
    }

    /// Number of basis functions.
    pub fn size(&self) -> usize {
        match self {
            BasisSpec::Fourier { pairs, .. } => 1 + 2 * pairs,
            BasisSpec::NelsonSiegel { .. } => 3,
            BasisSpec::Exponential { rates } => 1 + rates.len(),
            BasisSpec::GaussianRbf { centers, .. } => 1 + centers.len(),
        }
    }

    /// `φⱼ(τ)`.
    pub fn value(&self, j: usize, tau: f64) -> f64 {
        if j == 0 {
            return 1.0;
        }
        match self {
            BasisSpec::Fourier { period, .. } => {
                let k = j.div_ceil(2) as f64;
                let arg = k * 2.0 * PI / period * tau;
                if j % 2 == 1 {
                    libm::sin(arg)
                } else {
                    libm::cos(arg)
                }
            }
            BasisSpec::NelsonSiegel { lambda } => {
                let (f1, f2) = ns_loadings(*lambda, tau);
                if j == 1 {
                    f1
                } else {
                    f2
                }
            }
            BasisSpec::Exponential { rates } => libm::exp(rates[j - 1] * tau),
            BasisSpec::GaussianRbf { centers, width } => {
                let u = tau - centers[j - 1];
                libm::exp(-width * u * u)
            }
        }
    }

    /// `φⱼ''(τ)` in closed form.
    pub fn second_derivative(&self, j: usize, tau: f64) -> f64 {
        if j == 0 {
            return 0.0;
        }
        match self {
            BasisSpec::Fourier { period, .. } => {
                let kw = j.div_ceil(2) as f64 * 2.0 * PI / period;
                -kw * kw * self.value(j, tau)
            }
            BasisSpec::NelsonSiegel { lambda } => {
                let x = lambda * tau;
                let g2 = ns_slope_curvature(x);
                let l2 = lambda * lambda;
                if j == 1 {
                    l2 * g2
                } else {
                    l2 * (g2 - libm::exp(-x))
                }
            }
            BasisSpec::Exponential { rates } => {
                let r = rates[j - 1];
                r * r * libm::exp(r * tau)
            }
            BasisSpec::GaussianRbf { centers, width } => {
                let u = tau - centers[j - 1];
                (4.0 * width * width * u * u - 2.0 * width) * libm::exp(-width * u * u)
            }
        }
    }
}

/// Basis functions evaluated at `taus`: one row per maturity.
pub fn design_matrix(spec: &BasisSpec, taus: &[f64]) -> Result<Matrix> {
    spec.validate()?;
    Ok(Matrix::from_fn(taus.len(), spec.size(), |i, j| spec.value(j, taus[i])))
}

/// `[R₂]ⱼₖ = ∫_lo^hi φⱼ''(t) φₖ''(t) dt` by composite Simpson.
pub fn penalty_matrix_r2(spec: &BasisSpec, lo: f64, hi: f64) -> Result<SymMatrix> {
    spec.validate()?;
    let n = spec.size();
    // second derivatives tabulated once on the quadrature nodes
    let h = (hi - lo) / R2_PANELS as f64;
    let nodes: Vec<f64> = (0..=R2_PANELS).map(|i| lo + i as f64 * h).collect();
    let d2: Vec<Vec<f64>> = (0..n).map(|j| nodes.iter().map(|&t| spec.second_derivative(j, t)).collect()).collect();
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let at = |t: f64| {
                let i = libm::round((t - lo) / h) as usize;
                d2[j][i] * d2[k][i]
            };
            let v = simpson(at, lo, hi, R2_PANELS)?;
            out[(j, k)] = v;
            out[(k, j)] = v;
        }
    }
    SymMatrix::new(out)
}

/// Fitted coefficients for a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFit {
    pub spec: BasisSpec,
    pub coefficients: Vec<f64>,
    /// Roughness penalty weight; 0 for plain OLS.
    pub penalty_lambda: f64,
}

impl BasisFit {
    /// `βᵀR₂β` over `[lo, hi]`.
    pub fn curvature_energy(&self, lo: f64, hi: f64) -> Result<f64> {
        penalty_matrix_r2(&self.spec, lo, hi)?.quad_form(&self.coefficients)
    }
}

fn check_curve(grid: &TermGrid, yields: &[f64], spec: &BasisSpec) -> Result<()> {
    if yields.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: yields.len() });
    }
    if grid.len() < spec.size() {
        return Err(Error::InsufficientData { needed: spec.size() - 1, available: grid.len() });
    }
    Ok(())
}

/// OLS coefficients of `yields` on the basis evaluated at the grid.
pub fn fit_ols(spec: &BasisSpec, grid: &TermGrid, yields: &[f64]) -> Result<BasisFit> {
    check_curve(grid, yields, spec)?;
    let phi = design_matrix(spec, grid.terms())?;
    let coefficients = ols_solve(&phi, yields)?;
    Ok(BasisFit { spec: spec.clone(), coefficients, penalty_lambda: 0.0 })
}

/// Roughness-penalized fit, with `R₂` integrated over the grid's range.
pub fn fit_penalized(spec: &BasisSpec, grid: &TermGrid, yields: &[f64], lambda: f64) -> Result<BasisFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter("penalty weight must be finite and non-negative"));
    }
    if lambda == 0.0 {
        return fit_ols(spec, grid, yields);
    }
    check_curve(grid, yields, spec)?;
    let phi = design_matrix(spec, grid.terms())?;
    let r2 = penalty_matrix_r2(spec, grid.min(), grid.max())?;
    let gram = phi.gram();
    let n = spec.size();
    let lhs = SymMatrix::from_fn(n, |i, j| gram.get(i, j) + lambda * r2.get(i, j));
    let rhs = phi.t_matvec(yields)?;
    let coefficients = factor_spd(&lhs, 0.0)
        .map_err(|_| Error::RankDeficient)?
        .solve(&rhs)?;
    Ok(BasisFit { spec: spec.clone(), coefficients, penalty_lambda: lambda })
}

/// `f(τ) = Φ(τ)β` at each of `taus`.
pub fn evaluate(fit: &BasisFit, taus: &[f64]) -> Result<Vec<f64>> {
    if fit.coefficients.len() != fit.spec.size() {
        return Err(Error::DimensionMismatch { expected: fit.spec.size(), found: fit.coefficients.len() });
    }
    design_matrix(&fit.spec, taus)?.matvec(&fit.coefficients)
}

/// Sum of squared residuals of a fit on the grid.
pub fn sse(fit: &BasisFit, grid: &TermGrid, yields: &[f64]) -> Result<f64> {
    let fitted = evaluate(fit, grid.terms())?;
    Ok(fitted.iter().zip(yields).map(|(f, y)| (f - y) * (f - y)).sum())
}

/// Nelson-Siegel yields `β₁ + β₂f₁(τ) + β₃f₂(τ)` at `taus`.
pub fn ns_curve(lambda: f64, beta: [f64; 3], taus: &[f64]) -> Vec<f64> {
    taus.iter()
        .map(|&t| {
            let (f1, f2) = ns_loadings(lambda, t);
            beta[0] + beta[1] * f1 + beta[2] * f2
        })
        .collect()
}

/// Constant-only fit used as the smooth reference in comparisons.
pub fn constant_fit_sse(yields: &[f64]) -> f64 {
    let mean = yields.iter().sum::<f64>() / yields.len() as f64;
    yields.iter().map(|y| (y - mean) * (y - mean)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid() -> TermGrid {
        TermGrid::default()
    }

    #[test]
    fn ns_loadings_limits_and_reference_value() {
        let row = design_matrix(&BasisSpec::NelsonSiegel { lambda: 0.3 }, &[1e-12]).unwrap();
        assert_eq!(row.row(0), &[1.0, 1.0, 0.0]);
        let (f1, f2) = ns_loadings(0.3, 1e-6);
        assert!((f1 - 1.0).abs() < 1e-6 && f2.abs() < 1e-6);
        // (1 − e^{−7.308})/7.308, 40-digit reference
        let (f1, f2) = ns_loadings(0.0609, 120.0);
        assert!((f1 - 0.136_744_642_032_744_63).abs() < 1e-15);
        assert!((f2 - 0.136_074_486_008_042_4).abs() < 1e-15);
    }

    #[test]
    fn fourier_row_at_zero() {
        let m = design_matrix(&BasisSpec::Fourier { period: 12.0, pairs: 1 }, &[0.0]).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let specs = [
            BasisSpec::Fourier { period: 400.0, pairs: 3 },
            BasisSpec::NelsonSiegel { lambda: 0.0609 },
            BasisSpec::NelsonSiegel { lambda: 0.5 },
            BasisSpec::Exponential { rates: vec![-0.01, -0.1] },
            BasisSpec::GaussianRbf { centers: vec![12.0, 120.0], width: 1e-3 },
        ];
        let h = 1e-3;
        for spec in &specs {
            for j in 0..spec.size() {
                for &t in &[0.02, 0.5, 3.0, 17.0, 60.0, 200.0] {
                    let fd = (spec.value(j, t + h) - 2.0 * spec.value(j, t) + spec.value(j, t - h)) / (h * h);
                    let an = spec.second_derivative(j, t);
                    assert!((fd - an).abs() <= 1e-5 * (1.0 + an.abs()), "{spec:?} j={j} t={t}: {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn ns_curvature_series_joins_closed_form() {
        let below = ns_slope_curvature(0.05 - 1e-12);
        let above = ns_slope_curvature(0.05 + 1e-12);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn penalty_zero_for_constant_and_fourier_orthogonality() {
        let period = 24.0;
        let spec = BasisSpec::Fourier { period, pairs: 2 };
        let r2 = penalty_matrix_r2(&spec, 0.0, period).unwrap();
        for j in 0..spec.size() {
            assert_eq!(r2.get(0, j), 0.0);
        }
        let w = 2.0 * PI / period;
        let scale = w.powi(4) * period / 2.0;
        assert!(r2.get(1, 2).abs() < 1e-10 * scale);
        // ∫₀^P ω⁴ sin²(ωt) dt = ω⁴ P / 2
        assert!((r2.get(1, 1) - scale).abs() < 1e-8 * scale);
        assert!((r2.get(2, 2) - scale).abs() < 1e-8 * scale);
    }

    #[test]
    fn noiseless_ns_recovery() {
        let beta = [3.0, -1.0, 0.5];
        let y = ns_curve(0.5, beta, grid().terms());
        let fit = fit_ols(&BasisSpec::NelsonSiegel { lambda: 0.5 }, &grid(), &y).unwrap();
        for (b, e) in fit.coefficients.iter().zip(beta) {
            assert!((b - e).abs() < 1e-10, "{:?}", fit.coefficients);
        }
        let level = BasisFit { spec: BasisSpec::NelsonSiegel { lambda: 0.07 }, coefficients: vec![4.2, 0.0, 0.0], penalty_lambda: 0.0 };
        assert_eq!(evaluate(&level, &[0.5, 7.0, 400.0]).unwrap(), vec![4.2; 3]);
    }

    #[test]
    fn fourier_square_system_interpolates() {
        let y: Vec<f64> = grid().terms().iter().map(|t| 4.0 + 0.5 * libm::log(1.0 + t / 12.0)).collect();
        let spec = BasisSpec::Fourier { period: 1.1 * 360.0, pairs: 5 };
        let fit = fit_ols(&spec, &grid(), &y).unwrap();
        let sse = sse(&fit, &grid(), &y).unwrap();
        assert!(sse < 1e-12, "sse = {sse:e}");
    }

    #[test]
    fn penalized_zero_is_ols_and_huge_penalty_is_flat() {
        let y = [4.5, 4.6, 4.7, 4.75, 4.7, 4.68, 4.66, 4.67, 4.7, 4.9, 4.75];
        let spec = BasisSpec::Fourier { period: 396.0, pairs: 2 };
        let ols = fit_ols(&spec, &grid(), &y).unwrap();
        let pen = fit_penalized(&spec, &grid(), &y, 0.0).unwrap();
        assert_eq!(ols, pen);
        let flat = fit_penalized(&spec, &grid(), &y, 1e12).unwrap();
        let ols_size: f64 = ols.coefficients[1..].iter().map(|c| c.abs()).sum();
        let flat_size: f64 = flat.coefficients[1..].iter().map(|c| c.abs()).sum();
        assert!(flat_size < 1e-3 * ols_size, "{flat_size} vs {ols_size}");
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((flat.coefficients[0] - mean).abs() < 0.05);
        assert!(fit_penalized(&spec, &grid(), &y, -1.0).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(design_matrix(&BasisSpec::NelsonSiegel { lambda: 0.0 }, &[1.0]).is_err());
        assert!(design_matrix(&BasisSpec::Fourier { period: 1.0, pairs: 0 }, &[1.0]).is_err());
        assert!(design_matrix(&BasisSpec::GaussianRbf { centers: vec![1.0], width: -1.0 }, &[1.0]).is_err());
        let y = [1.0; 11];
        assert!(matches!(
            fit_ols(&BasisSpec::Fourier { period: 400.0, pairs: 6 }, &grid(), &y),
            Err(Error::InsufficientData { .. })
        ));
    }
}
