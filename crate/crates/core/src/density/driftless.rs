use super::{coeffs_driftless, gaussian_kernel, path_lengths, TransitionDensity};
use crate::error::{ensure_finite, ensure_positive_time, Error, Result};
use crate::params::{DensityValue, SkewParams, TruncationPolicy};

/// Lazily generated `k`-terms of the driftless ratio `v(t, x, y)`.
#[derive(Debug, Clone)]
pub(crate) struct RatioTerms {
    c: [f64; 4],
    a: [f64; 4],
    d: f64,
    two_z: f64,
    t: f64,
    beta: f64,
}

impl RatioTerms {
    pub(crate) fn new(t: f64, x: f64, y: f64, params: &SkewParams) -> Self {
        Self {
            c: coeffs_driftless(y, params),
            a: path_lengths(x, y, params),
            d: (y - x).abs(),
            two_z: 2.0 * params.gap(),
            t,
            beta: params.beta_product(),
        }
    }

    /// `(−β1β2)^k Σ_j c_j e^{−ℓ²/2t − |x−y|ℓ/t}` with `ℓ = a_j + 2zk`.
    pub(crate) fn term(&self, k: usize) -> f64 {
        let weight = if k == 0 {
            1.0
        } else {
            (-self.beta).powi(k as i32)
        };
        if weight == 0.0 {
            return 0.0;
        }
        let shift = self.two_z * k as f64;
        let s: f64 = self
            .c
            .iter()
            .zip(&self.a)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, a)| {
                let l = a + shift;
                c * (-(l * l) / (2.0 * self.t) - self.d * l / self.t).exp()
            })
            .sum();
        weight * s
    }

    pub(crate) fn partial_sum(&self, n: usize) -> f64 {
        (0..=n).map(|k| self.term(k)).sum()
    }
}

fn check_driftless(t: f64, x: f64, y: f64, params: &SkewParams) -> Result<()> {
    ensure_positive_time(t)?;
    ensure_finite("x", x)?;
    ensure_finite("y", y)?;
    if params.mu() != 0.0 {
        return Err(Error::UnsupportedRegime(format!(
            "the driftless series needs mu = 0, got {}",
            params.mu()
        )));
    }
    Ok(())
}

/// Partial sum `v_N` of the driftless ratio (terms `k = 0..=n`).
pub fn ratio_v_driftless(t: f64, x: f64, y: f64, params: &SkewParams, n: usize) -> Result<f64> {
    check_driftless(t, x, y, params)?;
    Ok(RatioTerms::new(t, x, y, params).partial_sum(n))
}

/// Driftless two-barrier density with the geometric rest bound.
pub fn density_driftless(
    t: f64,
    x: f64,
    y: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
) -> Result<DensityValue> {
    check_driftless(t, x, y, params)?;
    let n = policy.driftless_truncation(params);
    let p0 = gaussian_kernel(t, x, y, 0.0);
    let v = RatioTerms::new(t, x, y, params).partial_sum(n);
    let rest = if params.beta_product() == 0.0 {
        0.0
    } else {
        params.vbar() * params.delta(n)
    };
    Ok(DensityValue {
        value: p0 * v,
        error_bound: p0 * rest,
        terms_used: n + 1,
        exact_formula: false,
        rigorous_bound: true,
    })
}

/// [`density_driftless`] bound to one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct DriftlessSeries {
    params: SkewParams,
    policy: TruncationPolicy,
}

impl DriftlessSeries {
    pub fn new(params: SkewParams, policy: TruncationPolicy) -> Result<Self> {
        if params.mu() != 0.0 {
            return Err(Error::UnsupportedRegime(
                "the driftless series needs mu = 0".into(),
            ));
        }
        Ok(Self { params, policy })
    }
}

impl TransitionDensity for DriftlessSeries {
    fn params(&self) -> &SkewParams {
        &self.params
    }

    fn density(&self, t: f64, x: f64, y: f64) -> Result<DensityValue> {
        density_driftless(t, x, y, &self.params, &self.policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig6() -> SkewParams {
        SkewParams::driftless(0.0, 1.0, 0.5, -0.5).unwrap()
    }

    #[test]
    fn pure_gaussian() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.0).unwrap();
        let d = density_driftless(1.0, 0.3, 0.3, &p, &TruncationPolicy::default()).unwrap();
        assert_relative_eq!(d.value, 0.398_942_280_4, epsilon = 1e-10);
        assert_eq!(d.error_bound, 0.0);
        assert_eq!(d.terms_used, 1);
    }

    #[test]
    fn jump_ratio_at_lower_barrier() {
        let pol = TruncationPolicy::new(60, 1e-12).unwrap();
        let up = density_driftless(1.0, 0.5, 1e-9, &fig6(), &pol)
            .unwrap()
            .value;
        let down = density_driftless(1.0, 0.5, -1e-9, &fig6(), &pol)
            .unwrap()
            .value;
        assert_relative_eq!(up / down, 3.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let pol = TruncationPolicy::default();
        assert!(density_driftless(0.0, 0.0, 0.0, &fig6(), &pol).is_err());
        assert!(density_driftless(1.0, f64::NAN, 0.0, &fig6(), &pol).is_err());
        let drifted = fig6().with_mu(1.0).unwrap();
        assert!(matches!(
            density_driftless(1.0, 0.0, 0.0, &drifted, &pol),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn one_zero_beta_makes_series_finite() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.6).unwrap();
        let v0 = ratio_v_driftless(0.7, 0.2, 1.4, &p, 0).unwrap();
        for n in 1..6 {
            assert_eq!(ratio_v_driftless(0.7, 0.2, 1.4, &p, n).unwrap(), v0);
        }
    }

    #[test]
    fn tolerance_soundness() {
        let p = fig6();
        let loose = TruncationPolicy::new(100, 1e-4).unwrap();
        let tight = TruncationPolicy::new(100, 1e-12).unwrap();
        for y in [-1.5, -0.2, 0.0, 0.5, 0.99, 1.0, 2.5] {
            let a = density_driftless(1.0, 0.5, y, &p, &loose).unwrap().value;
            let b = density_driftless(1.0, 0.5, y, &p, &tight).unwrap().value;
            let p0 = gaussian_kernel(1.0, 0.5, y, 0.0);
            assert!((a - b).abs() <= 1e-4 * p0);
        }
    }

    proptest! {
        #[test]
        fn normalized_ratio_within_envelope(x in -2.0f64..3.0, y in -2.0f64..3.0, t in 0.05f64..4.0) {
            let p = fig6();
            let n = 10;
            let v = ratio_v_driftless(t, x, y, &p, n).unwrap();
            let rest = p.vbar() * p.delta(n);
            prop_assert!(v / p.vbar() > -rest && (v - rest) / p.vbar() <= 1.0);
        }

        #[test]
        fn consecutive_partial_sums_close(x in -2.0f64..3.0, y in -2.0f64..3.0, n in 0usize..12) {
            let p = SkewParams::driftless(0.0, 1.0, 0.3, -0.7).unwrap();
            let a = ratio_v_driftless(1.0, x, y, &p, n).unwrap();
            let b = ratio_v_driftless(1.0, x, y, &p, n + 1).unwrap();
            let cmax = 1.0f64;
            prop_assert!((b - a).abs() <= 4.0 * cmax * 0.21f64.powi(n as i32 + 1) + 1e-15);
        }
    }
}
