use crate::{Error, Result};

/// Composite Simpson rule over `[lo, hi]` with `n_panels` (even) panels.
pub fn simpson(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, n_panels: usize) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter("quadrature requires lo < hi"));
    }
    if n_panels == 0 || !n_panels.is_multiple_of(2) {
        return Err(Error::InvalidParameter("Simpson rule needs an even, positive panel count"));
    }
    let h = (hi - lo) / n_panels as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n_panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn constant_and_cubic_are_exact() {
        assert_eq!(simpson(|_| 1.0, 0.0, 1.0, 2).unwrap(), 1.0);
        assert!((simpson(|x| x * x, 0.0, 1.0, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((simpson(|x| x * x * x, 0.0, 2.0, 4).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn sine_half_period() {
        // ∫₀^π sin = [−cos]₀^π = 2
        let v = simpson(libm::sin, 0.0, PI, 64).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(simpson(|x| x, 0.0, 1.0, 3).is_err());
        assert!(simpson(|x| x, 1.0, 1.0, 2).is_err());
    }
}
