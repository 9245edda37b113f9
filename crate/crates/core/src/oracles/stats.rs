//! Goodness-of-fit statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Asymptotic 1% critical value of `√n·D_n`.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Kolmogorov–Smirnov distance `sup |F_n − F|` between the empirical CDF of
/// `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    if samples.len() < 100 {
        return Err(Error::Domain(format!(
            "at least 100 samples are needed, got {}",
            samples.len()
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of observed counts against expected counts;
/// `dof = bins − 1`.
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> Result<ChiSquareResult> {
    if observed.is_empty() {
        return Err(Error::EmptyInput("observed counts"));
    }
    if observed.len() != expected.len() {
        return Err(Error::Domain("observed and expected lengths differ".into()));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Domain("expected counts must be positive".into()));
    }
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = observed.len() - 1;
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::Domain(e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::special::phi_c;

    fn normal_cdf(x: f64) -> f64 {
        1.0 - phi_c(x)
    }

    #[test]
    fn self_consistent_samples_pass() {
        let mut rng = RandomStream::new(21, 0);
        let mut passes = 0;
        for _ in 0..100 {
            let xs: Vec<f64> = (0..1000).map(|_| rng.normal()).collect();
            let d = ks_statistic(&xs, normal_cdf).unwrap();
            if d * (xs.len() as f64).sqrt() < KS_CRITICAL_1PCT {
                passes += 1;
            }
        }
        assert!(passes >= 97, "{passes}");
    }

    #[test]
    fn shifted_samples_fail() {
        let mut rng = RandomStream::new(22, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.normal() + 0.5).collect();
        assert!(ks_statistic(&xs, normal_cdf).unwrap() > 0.1);
    }

    #[test]
    fn ks_input_checks() {
        assert!(matches!(
            ks_statistic(&[], normal_cdf),
            Err(Error::EmptyInput(_))
        ));
        assert!(ks_statistic(&[0.0; 10], normal_cdf).is_err());
    }

    #[test]
    fn chi_square_perfect_fit() {
        let r = chi_square_test(&[10, 20, 30], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 2);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_test(&[100, 0], &[50.0, 50.0]).unwrap();
        assert!(r.p_value < 1e-10);
    }
}
