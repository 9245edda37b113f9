//! Model parameterization and evaluation controls.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Barriers `z1 < z2`, skewness coefficients `beta1`, `beta2` and drift `mu`.
///
/// Construction validates every invariant, so a `SkewParams` in hand is
/// always usable by the driftless evaluator and the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SkewParams {
    z1: f64,
    z2: f64,
    beta1: f64,
    beta2: f64,
    mu: f64,
}

#[derive(Deserialize)]
struct RawParams {
    z1: f64,
    z2: f64,
    beta1: f64,
    beta2: f64,
    #[serde(default)]
    mu: f64,
}

impl TryFrom<RawParams> for SkewParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        SkewParams::new(r.z1, r.z2, r.beta1, r.beta2, r.mu)
    }
}

impl SkewParams {
    pub fn new(z1: f64, z2: f64, beta1: f64, beta2: f64, mu: f64) -> Result<Self> {
        for (name, v) in [
            ("z1", z1),
            ("z2", z2),
            ("beta1", beta1),
            ("beta2", beta2),
            ("mu", mu),
        ] {
            ensure_finite(name, v)?;
        }
        if z1 >= z2 {
            return Err(Error::Domain(format!(
                "barriers must satisfy z1 < z2, got {z1} >= {z2}"
            )));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if b.abs() > 1.0 {
                return Err(Error::Domain(format!(
                    "{name} must lie in [-1, 1], got {b}"
                )));
            }
        }
        let prod = (beta1 * beta2).abs();
        if prod >= 1.0 {
            return Err(Error::DivergentBound(prod));
        }
        Ok(Self {
            z1,
            z2,
            beta1,
            beta2,
            mu,
        })
    }

    /// Parameters with zero drift.
    pub fn driftless(z1: f64, z2: f64, beta1: f64, beta2: f64) -> Result<Self> {
        Self::new(z1, z2, beta1, beta2, 0.0)
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn z2(&self) -> f64 {
        self.z2
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Barrier gap `z = z2 - z1`.
    pub fn gap(&self) -> f64 {
        self.z2 - self.z1
    }

    pub fn beta_product(&self) -> f64 {
        self.beta1 * self.beta2
    }

    /// Uniform envelope `v̄ = (1+|β1|)(1+|β2|)/(1-|β1β2|)` on the ratio `v`.
    pub fn vbar(&self) -> f64 {
        (1.0 + self.beta1.abs()) * (1.0 + self.beta2.abs()) / (1.0 - self.beta_product().abs())
    }

    /// Rest bound `δ_n = |β1β2|^{n+1}` after the first `n + 1` series terms.
    pub fn delta(&self, n: usize) -> f64 {
        self.beta_product().abs().powi(n as i32 + 1)
    }

    /// Same barriers and skewness, different drift.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.z1, self.z2, self.beta1, self.beta2, mu)
    }

    pub fn with_barriers(&self, z1: f64, z2: f64) -> Result<Self> {
        Self::new(z1, z2, self.beta1, self.beta2, self.mu)
    }

    pub fn with_betas(&self, beta1: f64, beta2: f64) -> Result<Self> {
        Self::new(self.z1, self.z2, beta1, beta2, self.mu)
    }

    /// Speed-measure weight `k(x)`, right-continuous at both barriers.
    pub fn weight_k(&self, x: f64) -> f64 {
        let (b1, b2) = (self.beta1, self.beta2);
        if x < self.z1 {
            0.25 * (1.0 - b1) * (1.0 - b2)
        } else if x < self.z2 {
            0.25 * (1.0 + b1) * (1.0 - b2)
        } else {
            0.25 * (1.0 + b1) * (1.0 + b2)
        }
    }

    /// `h(x) = k(x)·e^{2μx}`.
    pub fn weight_h(&self, x: f64) -> f64 {
        self.weight_k(x) * (2.0 * self.mu * x).exp()
    }
}

/// Series controls: a hard cap on the number of `k`-terms and a target
/// absolute error on the ratio `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy")]
pub struct TruncationPolicy {
    n_max: usize,
    tol: f64,
}

#[derive(Deserialize)]
struct RawPolicy {
    n_max: usize,
    tol: f64,
}

impl TryFrom<RawPolicy> for TruncationPolicy {
    type Error = Error;

    fn try_from(r: RawPolicy) -> Result<Self> {
        TruncationPolicy::new(r.n_max, r.tol)
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            n_max: 10,
            tol: 1e-10,
        }
    }
}

impl TruncationPolicy {
    pub fn new(n_max: usize, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!(
                "tol must be positive and finite, got {tol}"
            )));
        }
        Ok(Self { n_max, tol })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Smallest `N ≤ n_max` with `v̄·|β1β2|^{N+1} ≤ tol`.
    pub fn driftless_truncation(&self, params: &SkewParams) -> usize {
        let vbar = params.vbar();
        (0..=self.n_max)
            .find(|&n| vbar * params.delta(n) <= self.tol)
            .unwrap_or(self.n_max)
    }
}

/// A density evaluation together with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    /// Absolute bound on the neglected tail of the series.
    pub error_bound: f64,
    /// Number of `k`-terms summed (1 for closed forms).
    pub terms_used: usize,
    /// True for closed forms with no truncation at all.
    pub exact_formula: bool,
    /// False when `error_bound` is an empirical tail estimate rather than a proof.
    pub rigorous_bound: bool,
}

impl DensityValue {
    pub(crate) fn closed_form(value: f64) -> Self {
        Self {
            value,
            error_bound: 0.0,
            terms_used: 1,
            exact_formula: true,
            rigorous_bound: true,
        }
    }
}
