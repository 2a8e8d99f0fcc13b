//! Generates the bundled synthetic fixture `data/synthetic_treasury_2006.csv`.
//!
//! Curves are Nelson-Siegel shapes (λ = 0.0609 per month) whose level,
//! slope and curvature follow mean-reverting random walks, plus persistent
//! per-term deviations and rounding to two decimals, written newest first in
//! the Treasury par-yield layout with two-digit years.
//!
//! Usage: `cargo run -p yieldcast --example synth_fixture -- [OUT] [DAYS]`

use std::io::Write;

use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use yieldcast_core::basis::ns_curve;
use yieldcast_core::curve::{DEFAULT_TERMS, DEFAULT_TERM_LABELS};

const LAMBDA: f64 = 0.0609;
const SEED: u64 = 20_060_209;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "data/synthetic_treasury_2006.csv".into());
    let days: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(400);

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let z = Normal::new(0.0, 1.0).unwrap();
    let mean = [5.0, -0.4, -0.6];
    let phi = [0.998, 0.995, 0.98];
    let sd = [0.035, 0.03, 0.08];
    let mut beta = [4.75, -0.2, -0.4];
    let mut dev = [0.0; 11];

    let mut date = NaiveDate::from_ymd_opt(2006, 2, 9).unwrap();
    let mut rows = Vec::with_capacity(days);
    while rows.len() < days {
        if date.weekday().num_days_from_monday() < 5 {
            for j in 0..3 {
                beta[j] = mean[j] + phi[j] * (beta[j] - mean[j]) + sd[j] * z.sample(&mut rng);
            }
            let base = ns_curve(LAMBDA, beta, &DEFAULT_TERMS);
            let yields: Vec<f64> = base
                .iter()
                .zip(dev.iter_mut())
                .map(|(b, d)| {
                    *d = 0.9 * *d + 0.012 * z.sample(&mut rng);
                    ((b + *d) * 100.0).round() / 100.0
                })
                .collect();
            rows.push((date, yields));
        }
        date = date.succ_opt().unwrap();
    }

    if let Some(dir) = std::path::Path::new(&out).parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(&out)?);
    writeln!(f, "Date,{}", DEFAULT_TERM_LABELS.join(","))?;
    for (d, y) in rows.iter().rev() {
        let cells: Vec<String> = y.iter().map(|v| format!("{v:.2}")).collect();
        writeln!(f, "{:02}/{:02}/{:02},{}", d.month(), d.day(), d.year() % 100, cells.join(","))?;
    }
    f.flush()?;
    eprintln!("wrote {days} synthetic curves to {out}");
    Ok(())
}
