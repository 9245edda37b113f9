//! Transition densities of skew Brownian motion with one or two barriers.
//!
//! Every evaluator factors the density as a Gaussian kernel times a ratio
//! `v`; the series evaluators report how many `k`-terms they summed and a
//! bound on what was left out.

mod drift;
pub(crate) mod driftless;
mod one_barrier;

pub use drift::{
    density_two_barrier_drift, density_two_barrier_drift_branch, DriftBranch, DriftSeries,
};
pub use driftless::{density_driftless, ratio_v_driftless, DriftlessSeries};
pub use one_barrier::{density_one_barrier_drift, OneBarrierDrift};

use crate::error::Result;
use crate::params::{DensityValue, SkewParams};

/// Anything that evaluates `p(t, x, y)` for a fixed parameter set.
pub trait TransitionDensity: Sync {
    fn params(&self) -> &SkewParams;

    fn density(&self, t: f64, x: f64, y: f64) -> Result<DensityValue>;

    fn value(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.density(t, x, y).map(|d| d.value)
    }
}

#[inline]
fn side(y: f64, z: f64) -> f64 {
    if y >= z {
        1.0
    } else {
        -1.0
    }
}

/// Driftless coefficients `c1..c4` at `y`; indicators are right-continuous.
pub fn coeffs_driftless(y: f64, params: &SkewParams) -> [f64; 4] {
    let (b1, b2) = (params.beta1(), params.beta2());
    let between = y >= params.z1() && y < params.z2();
    [
        1.0,
        side(y, params.z1()) * b1,
        side(y, params.z2()) * b2,
        if between { -b1 * b2 } else { b1 * b2 },
    ]
}

/// Coefficients `c[h][j]` of the drifted numerator
/// `c_j(μ, y; w) = w²·c[0][j] + wμ·c[1][j] + μ²·c[2][j]`.
pub fn coeffs_drift(y: f64, params: &SkewParams) -> [[f64; 4]; 3] {
    let (b1, b2) = (params.beta1(), params.beta2());
    let c0 = coeffs_driftless(y, params);
    [
        c0,
        [b1 + b2, -b1 - c0[3], -b2 + c0[3], 0.0],
        [b1 * b2, b1 * c0[2], -b2 * c0[1], -c0[3]],
    ]
}

/// Extra path lengths `a1..a4` relative to the direct distance `|y - x|`.
pub fn path_lengths(x: f64, y: f64, params: &SkewParams) -> [f64; 4] {
    let (z1, z2) = (params.z1(), params.z2());
    let d = (y - x).abs();
    let a2 = (y - z1).abs() + (x - z1).abs() - d;
    let a3 = (y - z2).abs() + (x - z2).abs() - d;
    let a4 = 2.0 * (z2 - x.max(y).max(z1)).max(0.0) + 2.0 * (x.min(y).min(z2) - z1).max(0.0);
    // rounding can leave -0.0 or -1 ulp where the exact value is zero
    [0.0, a2.max(0.0), a3.max(0.0), a4]
}

/// Gaussian kernel `p^{(0)}_μ(t, x, y)`.
pub(crate) fn gaussian_kernel(t: f64, x: f64, y: f64, mu: f64) -> f64 {
    let st = t.sqrt();
    crate::special::phi((y - x - mu * t) / st) / st
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(b1: f64, b2: f64) -> SkewParams {
        SkewParams::driftless(0.0, 1.0, b1, b2).unwrap()
    }

    #[test]
    fn coefficient_table_below_z1() {
        assert_eq!(
            coeffs_driftless(-0.5, &p(0.5, -0.5)),
            [1.0, -0.5, 0.5, -0.25]
        );
    }

    #[test]
    fn coefficients_right_continuous() {
        let q = p(0.5, -0.5);
        assert_eq!(coeffs_driftless(0.0, &q), coeffs_driftless(0.5, &q));
        assert_eq!(coeffs_driftless(1.0, &q), coeffs_driftless(3.0, &q));
    }

    #[test]
    fn path_lengths_on_barrier() {
        let q = p(0.3, 0.3);
        assert_eq!(path_lengths(0.0, 0.0, &q), [0.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn path_lengths_across_both_barriers() {
        assert_eq!(path_lengths(-0.5, 1.5, &p(0.3, 0.3)), [0.0; 4]);
    }

    #[test]
    fn drift_table_reduces_and_collapses() {
        let q = p(0.4, -0.3);
        for y in [-1.0, 0.0, 0.4, 1.0, 2.0] {
            let c = coeffs_drift(y, &q);
            assert_eq!(c[0], coeffs_driftless(y, &q));
            assert_eq!(c[1][3], 0.0);
            assert_eq!(c[2][3], -c[0][3]);
        }
    }

    proptest! {
        #[test]
        fn coefficients_sum_to_four_k(y in -3.0f64..4.0, b1 in -1.0f64..1.0, b2 in -0.99f64..0.99) {
            let q = p(b1, b2);
            let s: f64 = coeffs_driftless(y, &q).iter().sum();
            prop_assert!((s - 4.0 * q.weight_k(y)).abs() < 1e-14);
        }

        #[test]
        fn path_lengths_nonnegative(x in -3.0f64..4.0, y in -3.0f64..4.0) {
            let q = p(0.2, 0.2);
            let a = path_lengths(x, y, &q);
            prop_assert!(a.iter().all(|&v| v >= 0.0));
            let opposite = (x - 0.0) * (y - 0.0) <= 0.0;
            prop_assert_eq!(a[1] == 0.0, opposite);
        }
    }

    #[test]
    fn kernel_matches_normal_pdf() {
        assert_relative_eq!(gaussian_kernel(1.0, 0.0, 0.0, 0.0), 0.398_942_280_401_432_7);
    }
}
