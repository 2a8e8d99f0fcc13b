//! Multi-method backtests with window evaluations spread over a thread pool.

use rayon::prelude::*;
use yieldcast_core::backtest::{forecast_day, gp_records, BacktestConfig, ForecastRecord, LambdaSelection, Method};
use yieldcast_core::curve::YieldSeries;
use yieldcast_core::ts_models::select_lambda;

pub const THREADS_ENV: &str = "YIELDCAST_THREADS";

/// Thread count from `YIELDCAST_THREADS`, else the number of cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Same records as [`yieldcast_core::backtest::rolling_backtest`], with the
/// window-based methods evaluated in parallel.
pub fn run_method(series: &YieldSeries, config: &BacktestConfig) -> yieldcast_core::Result<Vec<ForecastRecord>> {
    let (start, end) = config.eval_range(series.len(), series.grid().len())?;
    match config.method {
        Method::Gp => gp_records(series, start, end, &config.dgp),
        _ => (start..=end).into_par_iter().map(|d| forecast_day(series, d, config)).collect(),
    }
}

/// Decay rate chosen on the first training window, for runs that hold it
/// fixed; uses no data on or after the first evaluated day.
pub fn initial_window_lambda(series: &YieldSeries, config: &BacktestConfig) -> yieldcast_core::Result<f64> {
    let (start, _) = config.eval_range(series.len(), series.grid().len())?;
    select_lambda(&series.curves()[start - config.window_days..start], series.grid(), &config.lambda_grid)
}

/// Runs each method; one failure does not stop the others.
pub fn run_methods(
    series: &YieldSeries,
    methods: &[Method],
    base: &BacktestConfig,
    freeze_lambda: bool,
) -> Vec<(Method, yieldcast_core::Result<Vec<ForecastRecord>>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(thread_count()).build();
    let run = || {
        methods
            .par_iter()
            .map(|&method| {
                let mut cfg = BacktestConfig { method, ..base.clone() };
                let result = (|| {
                    if method == Method::Tsns && freeze_lambda {
                        cfg.lambda = LambdaSelection::Fixed(initial_window_lambda(series, &cfg)?);
                    }
                    run_method(series, &cfg)
                })();
                (method, result)
            })
            .collect()
    };
    match pool {
        Ok(p) => p.install(run),
        Err(_) => run(),
    }
}
