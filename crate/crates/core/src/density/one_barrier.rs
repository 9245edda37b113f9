use super::{gaussian_kernel, TransitionDensity};
use crate::error::{ensure_finite, ensure_positive_time, Error, Result};
use crate::params::{DensityValue, SkewParams};
use crate::special::{mills, SQRT_2PI};

/// Closed-form density of skew Brownian motion with drift `mu` and a single
/// barrier at `z1` with skewness `beta`.
///
/// `p = p^{(0)}_μ · v` with
/// `v = (1 − E)·1{x₁y₁>0} + (1 + βs)·E·(1 − βμ√(2πt)·e^{u²/2}Φᶜ(u))`,
/// `E = e^{−2x₁y₁/t}` on the same side and 1 across the barrier,
/// `u = (|x₁| + |y₁| + βμt)/√t`.
pub fn density_one_barrier_drift(
    t: f64,
    x: f64,
    y: f64,
    z1: f64,
    beta: f64,
    mu: f64,
) -> Result<DensityValue> {
    ensure_positive_time(t)?;
    for (name, v) in [("x", x), ("y", y), ("z1", z1), ("beta", beta), ("mu", mu)] {
        ensure_finite(name, v)?;
    }
    if beta.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "beta must lie in [-1, 1], got {beta}"
        )));
    }
    let (x1, y1) = (x - z1, y - z1);
    let s = if y >= z1 { 1.0 } else { -1.0 };
    let same_side = x1 * y1 > 0.0;
    let ln_e = if same_side { -2.0 * x1 * y1 / t } else { 0.0 };
    let st = t.sqrt();
    let u = (x1.abs() + y1.abs() + beta * mu * t) / st;
    let p0 = gaussian_kernel(t, x, y, mu);
    let k = 1.0 + beta * s;
    let e = ln_e.exp();

    let base = if same_side { 1.0 - e } else { 0.0 } + k * e;
    let coef = k * beta * mu * SQRT_2PI * st;
    let value = if coef == 0.0 {
        p0 * base
    } else if u > -30.0 {
        p0 * (base - coef * e * mills(u))
    } else {
        // e^{u²/2} is far larger than p0 here; pair them in log space
        let ln_p0 = -0.5 * ((y - x - mu * t) / st).powi(2) - (SQRT_2PI * st).ln();
        let tilted = (ln_p0 + ln_e + 0.5 * u * u).exp();
        p0 * base - coef * (tilted - p0 * e * mills(-u))
    };
    Ok(DensityValue::closed_form(value))
}

/// [`density_one_barrier_drift`] bound to the lower barrier of a parameter set;
/// `z2` and `beta2` are ignored.
#[derive(Debug, Clone, Copy)]
pub struct OneBarrierDrift {
    params: SkewParams,
}

impl OneBarrierDrift {
    pub fn new(z1: f64, beta: f64, mu: f64) -> Result<Self> {
        let params = SkewParams::new(z1, z1 + 1.0, beta, 0.0, mu)?;
        Ok(Self { params })
    }
}

impl TransitionDensity for OneBarrierDrift {
    fn params(&self) -> &SkewParams {
        &self.params
    }

    fn density(&self, t: f64, x: f64, y: f64) -> Result<DensityValue> {
        let p = &self.params;
        density_one_barrier_drift(t, x, y, p.z1(), p.beta1(), p.mu())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density_driftless;
    use crate::params::TruncationPolicy;
    use approx::assert_relative_eq;

    #[test]
    fn zero_beta_is_drifted_gaussian() {
        for (x, y, mu) in [(0.0, 0.3, 1.0), (1.0, -2.0, -0.5), (0.2, 0.2, 3.0)] {
            let d = density_one_barrier_drift(0.8, x, y, 0.0, 0.0, mu).unwrap();
            let st = 0.8f64.sqrt();
            let expected = crate::special::phi((y - x - mu * 0.8) / st) / st;
            assert_relative_eq!(d.value, expected, max_relative = 1e-15);
            assert!(d.exact_formula);
            assert_eq!(d.error_bound, 0.0);
        }
    }

    #[test]
    fn driftless_limit_matches_series() {
        let p = SkewParams::driftless(0.0, 1.0, 0.7, 0.0).unwrap();
        let pol = TruncationPolicy::default();
        for (t, x, y) in [
            (1.0, 0.3, -0.4),
            (0.5, -1.0, -0.2),
            (2.0, 0.4, 2.2),
            (0.3, 0.0, 0.1),
        ] {
            let a = density_one_barrier_drift(t, x, y, 0.0, 0.7, 0.0)
                .unwrap()
                .value;
            let b = density_driftless(t, x, y, &p, &pol).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn reflecting_barrier_is_image_method() {
        for (x, y) in [(0.3, 0.5), (1.2, 0.1), (0.05, 2.0)] {
            let a = density_one_barrier_drift(1.0, x, y, 0.0, 1.0, 0.0)
                .unwrap()
                .value;
            let b = gaussian_kernel(1.0, x, y, 0.0) + gaussian_kernel(1.0, x, -y, 0.0);
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn large_adverse_drift_stays_finite() {
        let d = density_one_barrier_drift(1.0, 0.5, 0.3, 0.0, 0.9, -60.0).unwrap();
        assert!(d.value.is_finite() && d.value >= 0.0);
        let d = density_one_barrier_drift(1.0, 0.5, 0.3, 0.0, 0.9, 60.0).unwrap();
        assert!(d.value.is_finite() && d.value >= 0.0);
    }
}
