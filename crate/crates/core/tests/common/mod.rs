//! Independent reference implementations used by the integration tests.
//! Everything here is deliberately naive: explicit inverses, determinants
//! and stacked regressions, sharing no code with the library.

#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| aug[x][c].abs().total_cmp(&aug[y][c].abs())).unwrap();
        aug.swap(c, p);
        let piv = aug[c][c];
        assert!(piv.abs() > 1e-300, "singular matrix in oracle");
        for v in aug[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = aug[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        aug[r][k] -= f * aug[c][k];
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Determinant by Gaussian elimination.
pub fn determinant(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(c, p);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn matvec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Kernel written out directly; maturities in months, lengthscale in years.
pub fn kernel(p: [f64; 4], s_months: f64, t_months: f64) -> f64 {
    let (s, t) = (s_months / 12.0, t_months / 12.0);
    p[0] * (-(s - t).powi(2) / (2.0 * p[1] * p[1])).exp() + p[2] * s * t
}

pub fn gram(p: [f64; 4], a: &[f64], b: &[f64]) -> Mat {
    a.iter().map(|&s| b.iter().map(|&t| kernel(p, s, t)).collect()).collect()
}

/// `log N(y; μ, Σ)` via explicit inverse and determinant.
pub fn mvn_log_density(y: &[f64], mean: &[f64], cov: &Mat) -> f64 {
    let r: Vec<f64> = y.iter().zip(mean).map(|(a, b)| a - b).collect();
    let inv = inverse(cov);
    let quad: f64 = r.iter().zip(matvec(&inv, &r)).map(|(a, b)| a * b).sum();
    let m = y.len() as f64;
    -0.5 * quad - 0.5 * determinant(cov).ln() - 0.5 * m * (2.0 * std::f64::consts::PI).ln()
}

/// Conditions the joint Gaussian of `(f(test), y(train))` on `y`, where
/// `y = f(train) + ε` with `ε ~ N(0, σ²I)`.
pub fn condition_joint(p: [f64; 4], train: &[f64], y: &[f64], mean_train: &[f64], test: &[f64], mean_test: &[f64]) -> (Vec<f64>, Mat) {
    let mut s_oo = gram(p, train, train);
    for (i, row) in s_oo.iter_mut().enumerate() {
        row[i] += p[3] * p[3];
    }
    let s_to = gram(p, test, train);
    let s_tt = gram(p, test, test);
    let inv = inverse(&s_oo);
    let gain = matmul(&s_to, &inv);
    let r: Vec<f64> = y.iter().zip(mean_train).map(|(a, b)| a - b).collect();
    let mean = mean_test.iter().zip(matvec(&gain, &r)).map(|(m, s)| m + s).collect();
    let reduce = matmul(&gain, &transpose(&s_to));
    let cov = s_tt.iter().zip(&reduce).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
    (mean, cov)
}

/// Stacked regression `Y = X B` with rows `[1, y_{i-1}, …, y_{i-k}]`,
/// solved by explicit normal equations. Returns `(intercept, A_1..A_k)`
/// with `A_j[r][c]` the effect of lag `j` of coordinate `c` on `r`.
pub fn stacked_var(data: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<Mat>) {
    let dim = data[0].len();
    let x: Mat = (k..data.len())
        .map(|i| {
            let mut row = vec![1.0];
            for j in 1..=k {
                row.extend_from_slice(&data[i - j]);
            }
            row
        })
        .collect();
    let y: Mat = data[k..].to_vec();
    let xt = transpose(&x);
    let b = matmul(&matmul(&inverse(&matmul(&xt, &x)), &xt), &y); // (1+dim·k) × dim
    let intercept = b[0].clone();
    let coefs = (0..k)
        .map(|j| (0..dim).map(|r| (0..dim).map(|c| b[1 + j * dim + c][r]).collect()).collect())
        .collect();
    (intercept, coefs)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Proptest settings without on-disk regression files.
pub fn proptest_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases, failure_persistence: None, ..Default::default() }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Business-day dates starting 2006-02-09.
pub fn business_days(n: usize) -> Vec<chrono::NaiveDate> {
    use chrono::Datelike;
    let mut d = chrono::NaiveDate::from_ymd_opt(2006, 2, 9).unwrap();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if d.weekday().num_days_from_monday() < 5 {
            out.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    out
}

/// Nelson-Siegel factors following a mean-reverting walk plus observation
/// noise, on the default grid.
pub fn synthetic_series(n: usize, seed: u64) -> yieldcast_core::curve::YieldSeries {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use yieldcast_core::curve::{TermGrid, YieldCurve, YieldSeries, DEFAULT_TERMS};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let shock = Normal::new(0.0, 1.0).unwrap();
    let mu = [4.5, -1.5, 0.5];
    let phi = [0.995, 0.99, 0.97];
    let sd = [0.04, 0.05, 0.1];
    let mut b = [4.8, -0.3, -0.2];
    let curves = business_days(n)
        .into_iter()
        .map(|date| {
            for j in 0..3 {
                b[j] = mu[j] + phi[j] * (b[j] - mu[j]) + sd[j] * shock.sample(&mut rng);
            }
            let y = yieldcast_core::basis::ns_curve(0.0609, b, &DEFAULT_TERMS)
                .into_iter()
                .map(|v| v + 0.01 * shock.sample(&mut rng))
                .collect();
            YieldCurve::new(date, y).unwrap()
        })
        .collect();
    YieldSeries::new(TermGrid::default(), curves).unwrap()
}

/// Plain Cholesky factor of an SPD matrix.
pub fn cholesky_lower(a: &Mat) -> Mat {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = if i == j { s.max(0.0).sqrt() } else { s / l[j][j] };
        }
    }
    l
}

/// Latent curve on the default grid following a random walk with GP
/// increments (kernel `inc`), observed with white noise `inc[3]`.
pub fn random_walk_series(steps: usize, seed: u64) -> yieldcast_core::curve::YieldSeries {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use yieldcast_core::curve::{TermGrid, YieldCurve, YieldSeries, DEFAULT_TERMS};
    let inc = [0.0025, 3.0, 1e-6, 0.02];
    let mut k = gram(inc, &DEFAULT_TERMS, &DEFAULT_TERMS);
    for (i, row) in k.iter_mut().enumerate() {
        row[i] += 1e-12;
    }
    let l = cholesky_lower(&k);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut latent: Vec<f64> = DEFAULT_TERMS.iter().map(|t| 1.0 + 2.5 * (1.0 - (-t / 60.0).exp())).collect();
    let start = chrono::NaiveDate::from_ymd_opt(2008, 1, 1).unwrap();
    let curves = (0..steps)
        .map(|i| {
            let z: Vec<f64> = (0..11).map(|_| StandardNormal.sample(&mut rng)).collect();
            for (lat, d) in latent.iter_mut().zip(matvec(&l, &z)) {
                *lat += d;
            }
            let y: Vec<f64> = latent
                .iter()
                .map(|v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + inc[3] * e
                })
                .collect();
            YieldCurve::new(start + chrono::Duration::days(i as i64), y).unwrap()
        })
        .collect();
    YieldSeries::new(TermGrid::default(), curves).unwrap()
}
