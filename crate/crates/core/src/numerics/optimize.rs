//! Bounded Nelder-Mead simplex search.
//!
//! Trial points are projected onto the box `bounds` before evaluation.
//! Non-finite objective values are treated as `+∞`, so the simplex simply
//! moves away from them; only a non-finite value at the initial point is an
//! error.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Stop once every vertex is within this (max-norm) distance of the best.
    pub tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig { max_evals: 2000, tol: 1e-6, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }
}

/// Minimizes `objective` from `init` inside `bounds`.
///
/// The returned value never exceeds `objective(init)` (after projecting
/// `init` onto the bounds).
pub fn minimize<F>(objective: F, init: &[f64], bounds: &[(f64, f64)], config: &OptimConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = init.len();
    if bounds.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: bounds.len() });
    }
    if bounds.iter().any(|&(lo, hi)| !(lo <= hi)) {
        return Err(Error::InvalidParameter("lower bound exceeds upper bound"));
    }
    let mut f = Counted { f: objective, evals: 0 };
    let mut x0 = init.to_vec();
    project(&mut x0, bounds);
    let f0 = (f.f)(&x0);
    f.evals += 1;
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    if n == 0 {
        return Ok(Minimum { argmin: x0, value: f0, evals: f.evals });
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut v = x0.clone();
        let (lo, hi) = bounds[i];
        // step away from the nearer bound so the vertex stays distinct
        v[i] = if v[i] + config.initial_step <= hi || v[i] - config.initial_step < lo {
            v[i] + config.initial_step
        } else {
            v[i] - config.initial_step
        };
        project(&mut v, bounds);
        let fv = f.eval(&v);
        simplex.push((v, fv));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(best).fold(0.0_f64, |m, (a, b)| m.max(libm::fabs(a - b))))
            .fold(0.0_f64, f64::max);
        if diameter < config.tol || f.evals >= config.max_evals {
            break;
        }

        let mut centroid = alloc::vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut p, bounds);
            p
        };

        let xr = along(REFLECT);
        let fr = f.eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = f.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(CONTRACT);
            let fc = f.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = f.eval(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for (v, fv) in simplex[1..].iter_mut() {
            for (x, a) in v.iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            *fv = f.eval(v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (argmin, value) = simplex.swap_remove(0);
    if value <= f0 {
        Ok(Minimum { argmin, value, evals: f.evals })
    } else {
        Ok(Minimum { argmin: x0, value: f0, evals: f.evals })
    }
}

/// Runs [`minimize`] from each start and keeps the lowest value.
///
/// Starts whose objective is non-finite are skipped; the call fails only
/// when every start does.
pub fn minimize_multistart<F>(
    mut objective: F,
    starts: &[Vec<f64>],
    bounds: &[(f64, f64)],
    config: &OptimConfig,
) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best: Option<Minimum> = None;
    let mut evals = 0;
    let mut last_err = Error::NonFiniteObjective;
    for s in starts {
        match minimize(&mut objective, s, bounds, config) {
            Ok(m) => {
                evals += m.evals;
                if best.as_ref().is_none_or(|b| m.value < b.value) {
                    best = Some(m);
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.map(|mut b| {
        b.evals = evals;
        b
    })
    .ok_or(last_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

    #[test]
    fn quadratic_bowl_1d() {
        let m = minimize(|x| (x[0] - 2.0) * (x[0] - 2.0), &[0.0], &[FREE], &OptimConfig::default()).unwrap();
        assert!((m.argmin[0] - 2.0).abs() < 1e-6, "{:?}", m);
    }

    #[test]
    fn symmetric_bowl_2d() {
        let m = minimize(|x| x[0] * x[0] + x[1] * x[1], &[1.0, 1.0], &[FREE, FREE], &OptimConfig::default())
            .unwrap();
        assert!(m.argmin.iter().all(|v| v.abs() < 1e-6), "{:?}", m);
    }

    #[test]
    fn rosenbrock_converges() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(rosen, &[-1.2, 1.0], &[FREE, FREE], &OptimConfig { tol: 1e-10, ..Default::default() })
            .unwrap();
        assert!((m.argmin[0] - 1.0).abs() < 1e-4 && (m.argmin[1] - 1.0).abs() < 1e-4, "{:?}", m);
    }

    #[test]
    fn respects_bounds() {
        let m = minimize(|x| (x[0] + 5.0).powi(2), &[1.0], &[(0.0, 3.0)], &OptimConfig::default()).unwrap();
        assert_eq!(m.argmin[0], 0.0);
    }

    #[test]
    fn non_finite_probe_is_rejected_not_fatal() {
        let f = |x: &[f64]| if x[0] < 0.5 { f64::NAN } else { (x[0] - 1.0).powi(2) };
        let m = minimize(f, &[2.0], &[FREE], &OptimConfig::default()).unwrap();
        assert!((m.argmin[0] - 1.0).abs() < 1e-5);
        assert_eq!(minimize(f, &[0.0], &[FREE], &OptimConfig::default()), Err(Error::NonFiniteObjective));
    }

    #[test]
    fn respects_evaluation_budget() {
        let cfg = OptimConfig { max_evals: 30, tol: 0.0, ..Default::default() };
        let m = minimize(|x| x[0].powi(2) + x[1].powi(2), &[3.0, 3.0], &[FREE, FREE], &cfg).unwrap();
        assert!(m.evals <= 30 + 3);
        assert!(m.value <= 18.0);
    }

    #[test]
    fn multistart_picks_best_basin() {
        // two wells; the deeper one at x = 4
        let f = |x: &[f64]| ((x[0] + 1.0).powi(2)).min((x[0] - 4.0).powi(2) - 1.0);
        let m = minimize_multistart(f, &[vec![-1.5], vec![5.0]], &[FREE], &OptimConfig::default()).unwrap();
        assert!((m.argmin[0] - 4.0).abs() < 1e-5);
    }
}
