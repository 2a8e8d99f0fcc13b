//! Static Gaussian-process regression on one yield curve.
//!
//! The covariance is a squared-exponential plus a homogeneous linear kernel,
//!
//! ```text
//! k(s, t) = v_rbf · exp(−(s − t)² / (2ℓ²)) + v_lin · s · t
//! ```
//!
//! evaluated on maturities expressed in **years**: the public GP routines
//! accept maturities in months and divide by 12 before touching the kernel,
//! so `rbf_lengthscale` is in years and `linear_variance` in percent² per
//! year². [`kernel_matrix`] itself is unit-agnostic.
//!
//! Observations are `y ~ N(μ, K + σ²I)` for a supplied mean vector `μ`.
//! All inverses are applied through Cholesky solves.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{
    factor_spd, minimize, minimize_multistart, standard_normal_quantile, Matrix, OptimConfig, SymMatrix,
};
use crate::{Error, Result};

/// Months per kernel coordinate unit.
pub const MONTHS_PER_KERNEL_UNIT: f64 = 12.0;
/// Lower bound applied to every hyperparameter during estimation.
pub const PARAM_LOWER: f64 = 1e-6;
/// Upper bound applied to every hyperparameter during estimation.
pub const PARAM_UPPER: f64 = 1e4;
/// Posterior variances in `[−NEG_VARIANCE_TOL·scale, 0)` are clamped to 0.
pub const NEG_VARIANCE_TOL: f64 = 1e-10;

/// Covariance hyperparameters `(ρ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub rbf_variance: f64,
    /// Years.
    pub rbf_lengthscale: f64,
    pub linear_variance: f64,
    /// Observation noise standard deviation (percent).
    pub noise_sigma: f64,
}

impl KernelParams {
    pub fn new(rbf_variance: f64, rbf_lengthscale: f64, linear_variance: f64, noise_sigma: f64) -> Result<Self> {
        let p = KernelParams { rbf_variance, rbf_lengthscale, linear_variance, noise_sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("kernel parameters must be finite and strictly positive"))
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.rbf_variance, self.rbf_lengthscale, self.linear_variance, self.noise_sigma]
    }

    fn from_log(x: &[f64]) -> Self {
        KernelParams {
            rbf_variance: libm::exp(x[0]),
            rbf_lengthscale: libm::exp(x[1]),
            linear_variance: libm::exp(x[2]),
            noise_sigma: libm::exp(x[3]),
        }
    }

    fn to_log(self) -> Vec<f64> {
        self.to_array().iter().map(|v| libm::log(*v)).collect()
    }

    fn clamped(self) -> Self {
        let c = |v: f64| if v.is_finite() { v.clamp(PARAM_LOWER, PARAM_UPPER) } else { PARAM_LOWER };
        KernelParams {
            rbf_variance: c(self.rbf_variance),
            rbf_lengthscale: c(self.rbf_lengthscale),
            linear_variance: c(self.linear_variance),
            noise_sigma: c(self.noise_sigma),
        }
    }

    /// Data-driven starting point for estimation.
    ///
    /// Scales come from the residual `y − μ` taken about zero, which is the
    /// process mean the model assumes; the result is clamped into the
    /// estimation bounds.
    pub fn default_for(taus_months: &[f64], y: &[f64], mean: &[f64]) -> Self {
        let m = y.len().max(1) as f64;
        let second_moment = y.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / m;
        let max_tau = taus_months.iter().fold(0.0_f64, |a, t| a.max(t / MONTHS_PER_KERNEL_UNIT));
        let max_tau = if max_tau > 0.0 { max_tau } else { 1.0 };
        KernelParams {
            rbf_variance: second_moment,
            rbf_lengthscale: 2.0,
            linear_variance: 0.1 * second_moment / (max_tau * max_tau),
            noise_sigma: 0.1 * libm::sqrt(second_moment),
        }
        .clamped()
    }

    /// `k(s, t)` in kernel units.
    pub fn kernel(&self, s: f64, t: f64) -> f64 {
        let d = s - t;
        let l = self.rbf_lengthscale;
        self.rbf_variance * libm::exp(-d * d / (2.0 * l * l)) + self.linear_variance * s * t
    }
}

/// `K(a, b)` with coordinates in kernel units.
pub fn kernel_matrix(params: &KernelParams, taus_a: &[f64], taus_b: &[f64]) -> Matrix {
    Matrix::from_fn(taus_a.len(), taus_b.len(), |i, j| params.kernel(taus_a[i], taus_b[j]))
}

fn to_kernel_units(taus_months: &[f64]) -> Vec<f64> {
    taus_months.iter().map(|t| t / MONTHS_PER_KERNEL_UNIT).collect()
}

/// `K(τ, τ)` for maturities in months, exactly symmetric.
pub fn prior_covariance(params: &KernelParams, taus_months: &[f64]) -> SymMatrix {
    let x = to_kernel_units(taus_months);
    SymMatrix::from_fn(x.len(), |i, j| params.kernel(x[i], x[j]))
}

fn check_lengths(taus: &[f64], y: &[f64], mean: &[f64]) -> Result<()> {
    for v in [y, mean] {
        if v.len() != taus.len() {
            return Err(Error::DimensionMismatch { expected: taus.len(), found: v.len() });
        }
    }
    if taus.is_empty() {
        return Err(Error::InsufficientData { needed: 0, available: 0 });
    }
    Ok(())
}

/// `log N(y; μ, K + σ²I)` for maturities in months.
pub fn log_marginal_likelihood(params: &KernelParams, taus: &[f64], y: &[f64], mean: &[f64]) -> Result<f64> {
    check_lengths(taus, y, mean)?;
    params.validate()?;
    let noise = params.noise_sigma * params.noise_sigma;
    let a = prior_covariance(params, taus).with_diagonal(noise);
    let chol = factor_spd(&a, 0.0)?;
    let r: Vec<f64> = y.iter().zip(mean).map(|(a, b)| a - b).collect();
    let z = chol.forward(&r)?;
    let quad: f64 = z.iter().map(|v| v * v).sum();
    let m = taus.len() as f64;
    Ok(-0.5 * quad - 0.5 * chol.log_det() - 0.5 * m * libm::log(2.0 * PI))
}

/// Settings for hyperparameter estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperFitConfig {
    pub optim: OptimConfig,
    /// Also start from perturbed copies of the initial point (×10 and ×0.1).
    pub multistart: bool,
    /// Seeds the small jitter applied to the perturbed starts.
    pub seed: u64,
}

impl Default for HyperFitConfig {
    fn default() -> Self {
        HyperFitConfig { optim: OptimConfig::default(), multistart: true, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperFit {
    pub params: KernelParams,
    pub log_marginal_likelihood: f64,
    pub evals: usize,
}

/// Maximizes the log marginal likelihood over log-parameters inside
/// `[PARAM_LOWER, PARAM_UPPER]`.
///
/// The result is never worse than `init` (after clamping into the bounds).
pub fn fit_hyperparams(
    taus: &[f64],
    y: &[f64],
    mean: &[f64],
    init: &KernelParams,
    config: &HyperFitConfig,
) -> Result<HyperFit> {
    check_lengths(taus, y, mean)?;
    let init = init.clamped();
    let objective = |x: &[f64]| match log_marginal_likelihood(&KernelParams::from_log(x), taus, y, mean) {
        Ok(v) => -v,
        Err(_) => f64::NAN,
    };
    let bounds = [(libm::log(PARAM_LOWER), libm::log(PARAM_UPPER)); 4];
    let x0 = init.to_log();
    let best = if config.multistart {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut starts = vec![x0.clone()];
        for factor in [10.0_f64, 0.1] {
            let s: Vec<f64> = x0.iter().map(|v| v + libm::log(factor) + rng.random_range(-0.1..0.1)).collect();
            starts.push(s);
        }
        // the caller's start must succeed on its own
        if !objective(&x0).is_finite() {
            return Err(Error::NonFiniteObjective);
        }
        minimize_multistart(objective, &starts, &bounds, &config.optim)?
    } else {
        minimize(objective, &x0, &bounds, &config.optim)?
    };
    Ok(HyperFit {
        params: KernelParams::from_log(&best.argmin),
        log_marginal_likelihood: -best.value,
        evals: best.evals,
    })
}

/// Posterior of the latent curve at test maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior {
    pub train_taus: Vec<f64>,
    pub test_taus: Vec<f64>,
    pub mean_fn_at_train: Vec<f64>,
    pub posterior_mean: Vec<f64>,
    pub posterior_cov: SymMatrix,
    pub params: KernelParams,
}

/// Symmetrizes a computed covariance and clamps tiny negative variances.
pub(crate) fn clamp_covariance(cov: Matrix, prior_diag: &[f64]) -> Result<SymMatrix> {
    let mut cov = SymMatrix::symmetrize(cov)?.into_matrix();
    for (i, prior) in prior_diag.iter().enumerate() {
        let v = cov[(i, i)];
        if v < 0.0 {
            if v < -NEG_VARIANCE_TOL * prior.abs().max(1.0) {
                return Err(Error::NegativeVariance(v));
            }
            cov[(i, i)] = 0.0;
        }
    }
    SymMatrix::new(cov)
}

/// Posterior mean `μ(t*) + K(t*,t)[K + σ²I]⁻¹(y − μ(t))` and covariance
/// `K(t*,t*) − K(t*,t)[K + σ²I]⁻¹K(t,t*)`; maturities in months.
pub fn posterior(
    params: &KernelParams,
    taus: &[f64],
    y: &[f64],
    mean_at_taus: &[f64],
    test_taus: &[f64],
    mean_at_test: &[f64],
) -> Result<GpPosterior> {
    check_lengths(taus, y, mean_at_taus)?;
    if mean_at_test.len() != test_taus.len() {
        return Err(Error::DimensionMismatch { expected: test_taus.len(), found: mean_at_test.len() });
    }
    params.validate()?;
    let train = to_kernel_units(taus);
    let test = to_kernel_units(test_taus);
    let noise = params.noise_sigma * params.noise_sigma;
    let a = prior_covariance(params, taus).with_diagonal(noise);
    let chol = factor_spd(&a, 0.0)?;
    let r: Vec<f64> = y.iter().zip(mean_at_taus).map(|(a, b)| a - b).collect();
    let alpha = chol.solve(&r)?;
    let k_cross = kernel_matrix(params, &train, &test); // m × n*
    let shift = k_cross.t_matvec(&alpha)?;
    let posterior_mean: Vec<f64> = mean_at_test.iter().zip(&shift).map(|(m, s)| m + s).collect();

    let v = chol.forward_matrix(&k_cross)?; // L⁻¹K(t,t*)
    let k_test = kernel_matrix(params, &test, &test);
    let vtv = v.gram();
    let n = test.len();
    let cov = Matrix::from_fn(n, n, |i, j| k_test[(i, j)] - vtv.get(i, j));
    let prior_diag: Vec<f64> = (0..n).map(|i| k_test[(i, i)]).collect();
    let posterior_cov = clamp_covariance(cov, &prior_diag)?;
    Ok(GpPosterior {
        train_taus: taus.to_vec(),
        test_taus: test_taus.to_vec(),
        mean_fn_at_train: mean_at_taus.to_vec(),
        posterior_mean,
        posterior_cov,
        params: *params,
    })
}

/// Central Gaussian interval `mean ∓ z·sqrt(variance + noise²)`.
pub fn gaussian_intervals(mean: &[f64], variance: &[f64], noise_sigma: f64, coverage: f64) -> Result<Vec<(f64, f64)>> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidParameter("coverage must lie in (0, 1)"));
    }
    let z = standard_normal_quantile(0.5 + 0.5 * coverage);
    let noise = noise_sigma * noise_sigma;
    Ok(mean
        .iter()
        .zip(variance)
        .map(|(m, v)| {
            let half = z * libm::sqrt(v.max(0.0) + noise);
            (m - half, m + half)
        })
        .collect())
}

/// Observation intervals at the test maturities of a posterior.
pub fn predictive_interval(post: &GpPosterior, coverage: f64) -> Result<Vec<(f64, f64)>> {
    gaussian_intervals(&post.posterior_mean, &post.posterior_cov.diag(), post.params.noise_sigma, coverage)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rbf_only(v: f64, l: f64, noise: f64) -> KernelParams {
        // linear part negligible but still valid
        KernelParams::new(v, l, 1e-300, noise).unwrap()
    }

    #[test]
    fn kernel_values() {
        let p = KernelParams::new(1.0, 2.0, 1e-300, 1.0).unwrap();
        assert_eq!(kernel_matrix(&p, &[5.0], &[5.0])[(0, 0)], 1.0 + 1e-300 * 25.0);
        let k = kernel_matrix(&p, &[1.0], &[3.0])[(0, 0)];
        assert!((k - 0.606_530_659_712_633_4).abs() < 1e-15);
        let lin = KernelParams { rbf_variance: 0.0, ..KernelParams::new(1.0, 1.0, 2.0, 1.0).unwrap() };
        assert_eq!(lin.kernel(0.0, 7.0), 0.0);
        assert_eq!(lin.kernel(3.0, 0.0), 0.0);
    }

    #[test]
    fn scalar_marginal_likelihood() {
        let p = rbf_only(2.0, 1.0, 0.5);
        let v = 2.0;
        let s2 = v + 0.25;
        let y0: f64 = 1.3;
        let expected = -0.5 * y0 * y0 / s2 - 0.5 * libm::log(2.0 * PI * s2);
        let got = log_marginal_likelihood(&p, &[24.0], &[y0], &[0.0]).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_residual_leaves_only_normalizer() {
        let p = KernelParams::new(0.4, 3.0, 0.01, 0.1).unwrap();
        let taus = [1.0, 12.0, 120.0];
        let y = [4.0, 4.5, 5.0];
        let a = prior_covariance(&p, &taus).with_diagonal(0.01);
        let ld = factor_spd(&a, 0.0).unwrap().log_det();
        let got = log_marginal_likelihood(&p, &taus, &y, &y).unwrap();
        assert!((got - (-0.5 * ld - 1.5 * libm::log(2.0 * PI))).abs() < 1e-12);
    }

    #[test]
    fn noiseless_posterior_interpolates() {
        let p = KernelParams::new(1.0, 5.0, 0.01, 1e-8).unwrap();
        let taus = crate::curve::DEFAULT_TERMS;
        let y = [4.1, 4.2, 4.3, 4.4, 4.6, 4.7, 4.8, 4.9, 5.0, 5.2, 5.1];
        let zero = [0.0; 11];
        let post = posterior(&p, &taus, &y, &zero, &taus, &zero).unwrap();
        for (m, t) in post.posterior_mean.iter().zip(y) {
            assert!((m - t).abs() < 1e-4, "{m} vs {t}");
        }
    }

    #[test]
    fn far_test_point_reverts_to_prior() {
        let p = rbf_only(0.7, 0.5, 0.1);
        let post = posterior(&p, &[12.0, 24.0], &[1.0, 2.0], &[0.0, 0.0], &[6000.0], &[3.0]).unwrap();
        assert!((post.posterior_mean[0] - 3.0).abs() < 1e-12);
        assert!((post.posterior_cov.get(0, 0) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn interval_quantiles() {
        let iv = gaussian_intervals(&[0.0], &[1.0], 0.0, 0.95).unwrap();
        assert!((iv[0].1 - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((iv[0].0 + 1.959_963_984_540_054).abs() < 1e-12);
        let tiny = gaussian_intervals(&[2.0], &[1.0], 0.3, 1e-12).unwrap();
        assert!((tiny[0].1 - 2.0).abs() < 1e-11 && (tiny[0].0 - 2.0).abs() < 1e-11);
        assert_eq!(gaussian_intervals(&[2.0], &[0.0], 0.0, 0.9).unwrap(), vec![(2.0, 2.0)]);
        assert!(gaussian_intervals(&[0.0], &[1.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn degenerate_zero_data_does_not_fail() {
        let taus = crate::curve::DEFAULT_TERMS;
        let zero = [0.0; 11];
        let init = KernelParams::default_for(&taus, &zero, &zero);
        let cfg = HyperFitConfig { optim: OptimConfig { max_evals: 400, ..Default::default() }, ..Default::default() };
        let fit = fit_hyperparams(&taus, &zero, &zero, &init, &cfg).unwrap();
        assert!(fit.log_marginal_likelihood.is_finite());
        assert!(fit.params.noise_sigma < 1e-3 && fit.params.rbf_variance < 1e-3, "{:?}", fit.params);
    }

    #[test]
    fn clamps_only_tiny_negative_variance() {
        let ok = clamp_covariance(Matrix::from_rows(&[[-1e-12]]).unwrap(), &[1.0]).unwrap();
        assert_eq!(ok.get(0, 0), 0.0);
        assert!(matches!(
            clamp_covariance(Matrix::from_rows(&[[-1e-6]]).unwrap(), &[1.0]),
            Err(Error::NegativeVariance(_))
        ));
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(KernelParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(KernelParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }
}
