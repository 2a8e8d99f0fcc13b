//! Sequential dynamic Gaussian-process filter over daily yield curves.
//!
//! The latent curve follows a random walk in function space,
//! `μₜ = μₜ₋₁ + Wₜ` with `Wₜ ~ GP(0, K(·,·|ρ))`, and each day is observed
//! with white noise `σ`. The posterior at day `t` becomes the prior mean for
//! day `t + 1`. One filter cycle is:
//!
//! 1. **predict** day `t + 1` from the state at `t` (mean `μ̂ₜ`);
//! 2. observe `yₜ₊₁`;
//! 3. re-estimate `(ρ, σ)` by maximizing `log N(yₜ₊₁; μ̂ₜ, K + σ²I)`;
//! 4. **update** `μ̂ₜ₊₁ = μ̂ₜ + K[K + σ²I]⁻¹(yₜ₊₁ − μ̂ₜ)` and
//!    `K̂ₜ₊₁ = K − K[K + σ²I]⁻¹K`.
//!
//! Day 0 uses a zero prior mean, which makes the initial state exactly the
//! static [`gp::posterior`] of the first curve.
//!
//! This recursion is also the power-law-prior Bayesian filter with the
//! exponent fixed at 1 (the prior enters the posterior unflattened); there
//! is no separate code path for that case.

use alloc::vec;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::curve::{TermGrid, YieldCurve, YieldSeries};
use crate::gp::{self, HyperFitConfig, KernelParams};
use crate::numerics::SymMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpConfig {
    /// Coverage of the forecast intervals.
    pub coverage: f64,
    /// Re-estimate hyperparameters every this many steps; 0 disables refits.
    pub refit_every: usize,
    /// Run a full multi-start estimation every this many steps; other refits
    /// warm-start from the previous parameters.
    pub restart_every: usize,
    pub hyper: HyperFitConfig,
    /// Starting point for the day-0 estimation; data-driven when `None`.
    pub init_params: Option<KernelParams>,
}

impl Default for DgpConfig {
    fn default() -> Self {
        DgpConfig {
            coverage: 0.95,
            refit_every: 1,
            restart_every: 50,
            hyper: HyperFitConfig::default(),
            init_params: None,
        }
    }
}

/// Filter state after conditioning on the curve of day `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpState {
    pub t: usize,
    pub date: NaiveDate,
    pub grid: TermGrid,
    /// Posterior mean `μ̂ₜ` on the grid.
    pub mean: Vec<f64>,
    /// Posterior covariance `K̂ₜ` on the grid.
    pub cov: SymMatrix,
    pub params: KernelParams,
}

/// One-step-ahead forecast made before the target curve was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpForecast {
    pub for_step: usize,
    pub mean: Vec<f64>,
    pub interval_lo: Vec<f64>,
    pub interval_hi: Vec<f64>,
}

fn condition(grid: &TermGrid, params: &KernelParams, y: &[f64], prior_mean: &[f64]) -> Result<(Vec<f64>, SymMatrix)> {
    let post = gp::posterior(params, grid.terms(), y, prior_mean, grid.terms(), prior_mean)?;
    Ok((post.posterior_mean, post.posterior_cov))
}

fn hyper_config(config: &DgpConfig, step: usize, multistart: bool) -> HyperFitConfig {
    HyperFitConfig { multistart, seed: config.hyper.seed.wrapping_add(step as u64), ..config.hyper }
}

/// Day-0 state: estimate `(ρ₀, σ₀)` against a zero mean and condition on the
/// first curve.
pub fn init(grid: &TermGrid, first_curve: &YieldCurve, config: &DgpConfig) -> Result<DgpState> {
    let y = first_curve.yields();
    if y.len() != grid.len() {
        return Err(Error::GridMismatch { date: first_curve.date() });
    }
    let zero = vec![0.0; grid.len()];
    let start = config.init_params.unwrap_or_else(|| KernelParams::default_for(grid.terms(), y, &zero));
    let fit = gp::fit_hyperparams(grid.terms(), y, &zero, &start, &hyper_config(config, 0, true))?;
    let (mean, cov) = condition(grid, &fit.params, y, &zero)?;
    Ok(DgpState { t: 0, date: first_curve.date(), grid: grid.clone(), mean, cov, params: fit.params })
}

/// Forecast for step `t + 1`: mean `μ̂ₜ`, with observation intervals from
/// the one-step marginal `N(μ̂ₜ, K(ρ̂ₜ) + σ̂ₜ²I)`.
pub fn predict(state: &DgpState, coverage: f64) -> Result<DgpForecast> {
    let prior = gp::prior_covariance(&state.params, state.grid.terms());
    let iv = gp::gaussian_intervals(&state.mean, &prior.diag(), state.params.noise_sigma, coverage)?;
    let (interval_lo, interval_hi) = iv.into_iter().unzip();
    Ok(DgpForecast { for_step: state.t + 1, mean: state.mean.clone(), interval_lo, interval_hi })
}

/// Advances the filter by one observed curve.
///
/// Returns the new state and the forecast that was issued for
/// `observed_next` before it was seen.
pub fn step(state: &DgpState, observed_next: &YieldCurve, refit: bool, config: &DgpConfig) -> Result<(DgpState, DgpForecast)> {
    let y = observed_next.yields();
    if y.len() != state.grid.len() {
        return Err(Error::GridMismatch { date: observed_next.date() });
    }
    if observed_next.date() <= state.date {
        return Err(Error::UnorderedDates { prev: state.date, next: observed_next.date() });
    }
    let forecast = predict(state, config.coverage)?;
    let t = state.t + 1;
    let params = if refit {
        let multistart = config.restart_every > 0 && t.is_multiple_of(config.restart_every);
        let start = if multistart { KernelParams::default_for(state.grid.terms(), y, &state.mean) } else { state.params };
        let mut fit = gp::fit_hyperparams(state.grid.terms(), y, &state.mean, &start, &hyper_config(config, t, multistart))?;
        if multistart {
            // the warm start competes with the fresh starts
            let warm = gp::fit_hyperparams(state.grid.terms(), y, &state.mean, &state.params, &hyper_config(config, t, false))?;
            if warm.log_marginal_likelihood > fit.log_marginal_likelihood {
                fit = warm;
            }
        }
        fit.params
    } else {
        state.params
    };
    let (mean, cov) = condition(&state.grid, &params, y, &state.mean)?;
    let next = DgpState { t, date: observed_next.date(), grid: state.grid.clone(), mean, cov, params };
    Ok((next, forecast))
}

/// Runs the filter over a whole series; element `i` forecasts curve `i + 1`
/// using curves `0..=i` only.
pub fn run_filter(series: &YieldSeries, config: &DgpConfig) -> Result<Vec<DgpForecast>> {
    let mut out = Vec::new();
    run_filter_with(series, config, |_, f| out.push(f.clone()))?;
    Ok(out)
}

/// [`run_filter`] with a callback receiving each post-update state and the
/// forecast that preceded it.
pub fn run_filter_with(
    series: &YieldSeries,
    config: &DgpConfig,
    mut on_step: impl FnMut(&DgpState, &DgpForecast),
) -> Result<()> {
    let curves = series.curves();
    if curves.len() < 2 {
        return Err(Error::InsufficientData { needed: 1, available: curves.len() });
    }
    let mut state = init(series.grid(), &curves[0], config)?;
    for curve in &curves[1..] {
        let t = state.t + 1;
        let refit = config.refit_every > 0 && t % config.refit_every == 0;
        let (next, forecast) = step(&state, curve, refit, config)?;
        on_step(&next, &forecast);
        state = next;
    }
    Ok(())
}
