//! `yieldcast` command-line interface.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use yieldcast_core::backtest::{compare_report, rmse_per_term, BacktestConfig, ForecastRecord, Method};
use yieldcast_core::basis::{evaluate, fit_penalized, sse, BasisSpec};
use yieldcast_core::curve::YieldSeries;
use yieldcast_core::dynamic_gp::DgpConfig;
use yieldcast_core::gp::{fit_hyperparams, posterior, predictive_interval, HyperFitConfig, KernelParams};
use yieldcast_core::numerics::OptimConfig;
use yieldcast_core::ts_models::{default_lambda_grid, select_lambda, NsProjector};

use crate::ingest::{parse_treasury_csv, write_canonical_csv, IngestError, Ingested, MissingDataPolicy};
use crate::plots::write_plots;
use crate::report::{render_table, report_csv, report_json, write_atomic, write_records_csv};
use crate::runner::run_methods;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "yieldcast", version, about = "Yield-curve forecasting with a dynamic Gaussian-process filter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a Treasury par-yield CSV and write the canonical form.
    Ingest(IngestArgs),
    /// Fit a single day's curve and print JSON.
    Fit(FitArgs),
    /// Rolling one-step-ahead backtest with per-term RMSE report.
    Backtest(BacktestArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Policy {
    Drop,
    Ffill,
}

impl From<Policy> for MissingDataPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Drop => MissingDataPolicy::DropRow,
            Policy::Ffill => MissingDataPolicy::ForwardFill,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "drop")]
    pub policy: Policy,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    Gp,
    Ns,
    OlsBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisFamily {
    Fourier,
    NelsonSiegel,
    Exponential,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Curve date, YYYY-MM-DD.
    #[arg(long)]
    pub date: NaiveDate,
    #[arg(long, value_enum)]
    pub method: FitMethod,
    #[arg(long, value_enum, default_value = "drop")]
    pub policy: Policy,
    /// Nelson-Siegel decay rate per month; grid-searched on the day if omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value = "fourier")]
    pub basis: BasisFamily,
    /// Fourier sine/cosine pairs.
    #[arg(long, default_value_t = 3)]
    pub pairs: usize,
    /// Fourier period in months; 1.1 × the longest term if omitted.
    #[arg(long)]
    pub period: Option<f64>,
    /// Exponential basis rates per month (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.2])]
    pub rates: Vec<f64>,
    /// Gaussian basis centers in months (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 60.0, 120.0, 240.0, 360.0])]
    pub centers: Vec<f64>,
    /// Gaussian basis width in months.
    #[arg(long, default_value_t = 80.0)]
    pub width: f64,
    /// Roughness penalty weight (0 gives plain OLS).
    #[arg(long, default_value_t = 0.0)]
    pub penalty: f64,
    #[arg(long, default_value_t = 0.95)]
    pub coverage: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BacktestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gp,mvts,tsns", value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 250)]
    pub window: usize,
    /// First evaluated date (YYYY-MM-DD); the first day after the initial window if omitted.
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last evaluated date (YYYY-MM-DD); the series end if omitted.
    #[arg(long)]
    pub to: Option<NaiveDate>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write SVG plots under OUT/plots.
    #[arg(long)]
    pub plots: bool,
    /// Seed for the optimizer's multi-start perturbations.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Choose the Nelson-Siegel decay rate once, on the first training window.
    #[arg(long)]
    pub freeze_lambda: bool,
    /// Largest VAR order considered.
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value = "drop")]
    pub policy: Policy,
    /// GP forecast interval coverage.
    #[arg(long, default_value_t = 0.95)]
    pub coverage: f64,
    /// Re-estimate GP hyperparameters every N days (0 disables).
    #[arg(long, default_value_t = 1)]
    pub refit_every: usize,
    /// Full multi-start GP estimation every N days.
    #[arg(long, default_value_t = 50)]
    pub restart_every: usize,
    /// Objective evaluations per optimizer start.
    #[arg(long, default_value_t = 2000)]
    pub max_evals: usize,
    /// Simplex diameter at which the optimizer stops.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| format!("unknown method \"{s}\" (expected gp, mvts or tsns)"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<yieldcast_core::Error> for CliError {
    fn from(e: yieldcast_core::Error) -> Self {
        use yieldcast_core::Error as E;
        match e {
            E::NotPositiveDefinite | E::RankDeficient | E::NonFiniteObjective | E::NonFinite(_) | E::NegativeVariance(_) => {
                CliError::Numeric(e.to_string())
            }
            E::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

fn load(path: &Path, policy: Policy) -> Result<Ingested, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_treasury_csv(BufReader::new(file), policy.into()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Backtest(a) => cmd_backtest(&a),
    }
}

pub fn cmd_ingest(a: &IngestArgs) -> Result<(), CliError> {
    let ing = load(&a.input, a.policy)?;
    let mut buf = Vec::new();
    write_canonical_csv(&ing.series, &mut buf).map_err(io_err(&a.output))?;
    write_atomic(&a.output, &buf).map_err(io_err(&a.output))?;
    let mut summary = format!("{} rows, {} dropped", ing.series.len(), ing.dropped);
    if ing.filled_cells > 0 {
        summary += &format!(", {} cells forward-filled", ing.filled_cells);
    }
    println!("{summary}");
    Ok(())
}

fn fit_json(a: &FitArgs, series: &YieldSeries) -> Result<Value, CliError> {
    let idx = series
        .index_of(a.date)
        .ok_or_else(|| CliError::Data(format!("date {} not found in {}", a.date, a.input.display())))?;
    let curve = &series.curves()[idx];
    let grid = series.grid();
    let y = curve.yields();
    let mut doc = json!({
        "date": a.date.to_string(),
        "terms": grid.terms(),
        "observed": y,
    });
    match a.method {
        FitMethod::Ns => {
            let lambda = match a.lambda {
                Some(l) => l,
                None => select_lambda(std::slice::from_ref(curve), grid, &default_lambda_grid())?,
            };
            let proj = NsProjector::new(lambda, grid)?;
            let b = proj.factors(y)?;
            let spec = BasisSpec::NelsonSiegel { lambda };
            let fit = yieldcast_core::basis::BasisFit { spec, coefficients: b.to_vec(), penalty_lambda: 0.0 };
            doc["method"] = json!("ns");
            doc["lambda"] = json!(lambda);
            doc["beta1"] = json!(b[0]);
            doc["beta2"] = json!(b[1]);
            doc["beta3"] = json!(b[2]);
            doc["fitted"] = json!(evaluate(&fit, grid.terms())?);
            doc["sse"] = json!(proj.sse(y, &b)?);
        }
        FitMethod::OlsBasis => {
            let (spec, params) = match a.basis {
                BasisFamily::Fourier => {
                    let period = a.period.unwrap_or(1.1 * grid.max());
                    (BasisSpec::Fourier { period, pairs: a.pairs }, json!({"family": "fourier", "period": period, "pairs": a.pairs}))
                }
                BasisFamily::NelsonSiegel => {
                    let lambda = a.lambda.unwrap_or(0.0609);
                    (BasisSpec::NelsonSiegel { lambda }, json!({"family": "nelson-siegel", "lambda": lambda}))
                }
                BasisFamily::Exponential => {
                    (BasisSpec::Exponential { rates: a.rates.clone() }, json!({"family": "exponential", "rates": a.rates}))
                }
                BasisFamily::Gaussian => (
                    BasisSpec::GaussianRbf { centers: a.centers.clone(), width: a.width },
                    json!({"family": "gaussian", "centers": a.centers, "width": a.width}),
                ),
            };
            let fit = fit_penalized(&spec, grid, y, a.penalty)?;
            doc["method"] = json!("ols-basis");
            doc["basis"] = params;
            doc["penalty"] = json!(a.penalty);
            doc["coefficients"] = json!(fit.coefficients);
            doc["fitted"] = json!(evaluate(&fit, grid.terms())?);
            doc["sse"] = json!(sse(&fit, grid, y)?);
        }
        FitMethod::Gp => {
            let zero = vec![0.0; y.len()];
            let init = KernelParams::default_for(grid.terms(), y, &zero);
            let cfg = HyperFitConfig { seed: a.seed, ..HyperFitConfig::default() };
            let hf = fit_hyperparams(grid.terms(), y, &zero, &init, &cfg)?;
            let post = posterior(&hf.params, grid.terms(), y, &zero, grid.terms(), &zero)?;
            let (lo, hi): (Vec<f64>, Vec<f64>) = predictive_interval(&post, a.coverage)?.into_iter().unzip();
            doc["method"] = json!("gp");
            doc["hyperparameters"] = json!({
                "rbf_variance": hf.params.rbf_variance,
                "rbf_lengthscale_years": hf.params.rbf_lengthscale,
                "linear_variance": hf.params.linear_variance,
                "noise_sigma": hf.params.noise_sigma,
            });
            doc["log_marginal_likelihood"] = json!(hf.log_marginal_likelihood);
            doc["fitted"] = json!(post.posterior_mean);
            doc["coverage"] = json!(a.coverage);
            doc["interval_lo"] = json!(lo);
            doc["interval_hi"] = json!(hi);
        }
    }
    Ok(doc)
}

pub fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    let ing = load(&a.input, a.policy)?;
    let doc = fit_json(a, &ing.series)?;
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &a.output {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(io_err(p))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Evaluation index range for `--from`/`--to`.
fn date_range(series: &YieldSeries, a: &BacktestArgs) -> Result<(Option<usize>, Option<usize>), CliError> {
    if let (Some(f), Some(t)) = (a.from, a.to) {
        if f > t {
            return Err(CliError::Usage(format!("--from {f} is after --to {t}")));
        }
    }
    let dates: Vec<NaiveDate> = series.dates().collect();
    let start = match a.from {
        None => None,
        Some(f) => {
            let i = dates.partition_point(|d| *d < f);
            if i >= dates.len() {
                return Err(CliError::Data(format!("--from {f} is after the last date in the data")));
            }
            if i < a.window {
                let earliest = dates.get(a.window).map_or_else(|| "none".to_string(), |d| d.to_string());
                return Err(CliError::Data(format!(
                    "--from {f} leaves fewer than {} training days (earliest allowed: {earliest})",
                    a.window
                )));
            }
            Some(i)
        }
    };
    let end = match a.to {
        None => None,
        Some(t) => {
            let n = dates.partition_point(|d| *d <= t);
            if n == 0 {
                return Err(CliError::Data(format!("--to {t} is before the first date in the data")));
            }
            Some(n - 1)
        }
    };
    if let (Some(s), Some(e)) = (start.or(Some(a.window)), end) {
        if s > e {
            return Err(CliError::Data("no evaluation days in the requested range".into()));
        }
    }
    Ok((start, end))
}

pub fn backtest_config(a: &BacktestArgs) -> Result<BacktestConfig, CliError> {
    if a.window == 0 {
        return Err(CliError::Usage("--window must be positive".into()));
    }
    if !(a.coverage > 0.0 && a.coverage < 1.0) {
        return Err(CliError::Usage("--coverage must lie in (0, 1)".into()));
    }
    let optim = OptimConfig { max_evals: a.max_evals, tol: a.tol, ..OptimConfig::default() };
    let dgp = DgpConfig {
        coverage: a.coverage,
        refit_every: a.refit_every,
        restart_every: a.restart_every,
        hyper: HyperFitConfig { optim, multistart: true, seed: a.seed },
        init_params: None,
    };
    Ok(BacktestConfig { window_days: a.window, dgp, k_max: a.k_max, ..BacktestConfig::new(Method::Gp) })
}

fn settings_json(a: &BacktestArgs, methods: &[Method]) -> Value {
    json!({
        "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "window": a.window,
        "k_max": a.k_max,
        "seed": a.seed,
        "freeze_lambda": a.freeze_lambda,
        "coverage": a.coverage,
        "refit_every": a.refit_every,
        "restart_every": a.restart_every,
    })
}

pub fn cmd_backtest(a: &BacktestArgs) -> Result<(), CliError> {
    let mut methods = a.methods.clone();
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(CliError::Usage("--methods is empty".into()));
    }
    let mut cfg = backtest_config(a)?;
    let ing = load(&a.input, a.policy)?;
    let series = &ing.series;
    let (start, end) = date_range(series, a)?;
    cfg.start_index = start;
    cfg.end_index = end;

    let results = run_methods(series, &methods, &cfg, a.freeze_lambda);
    let mut ok: Vec<(Method, Vec<ForecastRecord>)> = Vec::new();
    let mut failures: BTreeMap<String, String> = BTreeMap::new();
    let mut worst: Option<CliError> = None;
    for (m, r) in results {
        match r {
            Ok(recs) => ok.push((m, recs)),
            Err(e) => {
                eprintln!("{}: failed: {e}", m.name());
                failures.insert(m.name().into(), e.to_string());
                let ce = CliError::from(e);
                if worst.as_ref().is_none_or(|w| ce.exit_code() > w.exit_code()) {
                    worst = Some(ce);
                }
            }
        }
    }

    for (m, recs) in &ok {
        let mut buf = Vec::new();
        write_records_csv(recs, &mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        let p = a.out.join(format!("records_{}.csv", m.name()));
        write_atomic(&p, &buf).map_err(io_err(&p))?;
    }
    let reports = ok.iter().map(|(_, r)| rmse_per_term(r)).collect::<Result<Vec<_>, _>>()?;
    let table = if reports.is_empty() { None } else { Some(compare_report(&reports)?) };
    let json = report_json(&reports, table.as_ref(), &failures, settings_json(a, &methods));
    let json_text = serde_json::to_string_pretty(&json).expect("serializable") + "\n";
    let p = a.out.join("report.json");
    write_atomic(&p, json_text.as_bytes()).map_err(io_err(&p))?;
    let p = a.out.join("report.csv");
    write_atomic(&p, report_csv(&reports, table.as_ref()).as_bytes()).map_err(io_err(&p))?;
    if a.plots {
        let dir = a.out.join("plots");
        write_plots(&dir, &ok).map_err(io_err(&dir))?;
    }
    if let Some(first) = reports.first() {
        println!("{} evaluation days, {} to {}", first.n, first.first_date, first.last_date);
        print!("{}", render_table(&reports, table.as_ref()));
    }
    match worst {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
