//! Exact sampling from the driftless two-barrier density by rejection from
//! the Gaussian envelope, with acceptance decided by a lazy Bernoulli gate on
//! the partial sums of the ratio series.

use serde::{Deserialize, Serialize};

use crate::density::driftless::RatioTerms;
use crate::error::{ensure_finite, ensure_positive_time, Error, Result};
use crate::params::{SkewParams, TruncationPolicy};
use crate::rng::RandomStream;

/// Outcome of [`lazy_bernoulli`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernoulliDecision {
    pub decision: bool,
    /// Index at which the gap test passed (or `n_max` if it never did).
    pub n: usize,
    pub exact: bool,
}

/// Decides `u < lim f_n` from approximations with `|f_n − f_∞| ≤ δ_n`.
///
/// Starts at `n = 0`. After a failed test at `N` the next index tried is the
/// smallest `n > N` with `δ_n < |f_N − u|`, the first level at which the
/// observed gap could be certified. If no index up to `n_max` qualifies the
/// decision falls back to `u < f_{n_max}` and `exact` reports whether that
/// comparison was still certified.
pub fn lazy_bernoulli<F, D>(u: f64, mut f: F, delta: D, n_max: usize) -> BernoulliDecision
where
    F: FnMut(usize) -> f64,
    D: Fn(usize) -> f64,
{
    let mut n = 0;
    loop {
        let fn_ = f(n);
        let gap = (u - fn_).abs();
        if gap > delta(n) {
            return BernoulliDecision {
                decision: u < fn_,
                n,
                exact: true,
            };
        }
        match (n + 1..=n_max).find(|&m| delta(m) < gap) {
            Some(m) => n = m,
            None => {
                let last = if n == n_max { fn_ } else { f(n_max) };
                return BernoulliDecision {
                    decision: u < last,
                    n: n_max,
                    exact: (u - last).abs() > delta(n_max),
                };
            }
        }
    }
}

/// Audit trail of one proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRecord {
    pub proposal: f64,
    pub uniform: f64,
    /// Number of series terms summed before the decision.
    pub decision_index: usize,
    pub accepted: bool,
    /// False iff the term cap was reached without a certified decision.
    pub exact: bool,
}

/// One accepted draw and every proposal it took to get there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSample {
    pub y: f64,
    pub records: Vec<AcceptanceRecord>,
}

fn check_sampler(t: f64, x: f64, params: &SkewParams) -> Result<()> {
    ensure_positive_time(t)?;
    ensure_finite("x", x)?;
    if params.mu() != 0.0 {
        return Err(Error::UnsupportedRegime(
            "exact sampling is only available for mu = 0".into(),
        ));
    }
    Ok(())
}

/// Runs the acceptance gate for a single proposal `y` with uniform `u`.
pub fn decide_proposal(
    t: f64,
    x: f64,
    y: f64,
    u: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
) -> AcceptanceRecord {
    let terms = RatioTerms::new(t, x, y, params);
    let vbar = params.vbar();
    let mut sums: Vec<f64> = Vec::new();
    let f = |n: usize| {
        while sums.len() <= n {
            let prev = sums.last().copied().unwrap_or(0.0);
            sums.push(prev + terms.term(sums.len()));
        }
        sums[n] / vbar
    };
    let delta = |n: usize| params.delta(n);
    let d = lazy_bernoulli(u, f, delta, policy.n_max());
    AcceptanceRecord {
        proposal: y,
        uniform: u,
        decision_index: d.n + 1,
        accepted: d.decision,
        exact: d.exact,
    }
}

/// Draws one exact sample of `X_t` given `X_0 = x`.
pub fn sample_transition(
    t: f64,
    x: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<TransitionSample> {
    check_sampler(t, x, params)?;
    let st = t.sqrt();
    let mut records = Vec::new();
    loop {
        let y = x + st * rng.normal();
        let u = rng.uniform();
        let rec = decide_proposal(t, x, y, u, params, policy);
        records.push(rec);
        if rec.accepted {
            return Ok(TransitionSample { y, records });
        }
    }
}

/// `n` independent draws of `X_t`; returns samples and all proposal records.
pub fn sample_many(
    n: usize,
    t: f64,
    x: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<(Vec<f64>, Vec<AcceptanceRecord>)> {
    let mut ys = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let s = sample_transition(t, x, params, policy, rng)?;
        ys.push(s.y);
        records.extend(s.records);
    }
    Ok((ys, records))
}

/// A simulated trajectory on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub records: Vec<AcceptanceRecord>,
}

/// Chains exact transitions over the increments of `times`.
pub fn sample_path(
    times: &[f64],
    x0: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<PathSample> {
    if times.is_empty() {
        return Err(Error::EmptyInput("times"));
    }
    ensure_finite("x0", x0)?;
    if !(times[0] >= 0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "times must start at a non-negative value and increase strictly".into(),
        ));
    }
    let mut positions = Vec::with_capacity(times.len());
    let mut records = Vec::new();
    positions.push(x0);
    let mut x = x0;
    for w in times.windows(2) {
        let s = sample_transition(w[1] - w[0], x, params, policy, rng)?;
        x = s.y;
        positions.push(x);
        records.extend(s.records);
    }
    Ok(PathSample {
        times: times.to_vec(),
        positions,
        records,
    })
}

/// Aggregates over proposal records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub mean_decision_index: f64,
    pub exact_fraction: f64,
    pub acceptance_rate: f64,
}

pub fn acceptance_stats(records: &[AcceptanceRecord]) -> Result<AcceptanceStats> {
    if records.is_empty() {
        return Err(Error::EmptyInput("acceptance records"));
    }
    let n = records.len() as f64;
    let idx: usize = records.iter().map(|r| r.decision_index).sum();
    let exact = records.iter().filter(|r| r.exact).count();
    let acc = records.iter().filter(|r| r.accepted).count();
    Ok(AcceptanceStats {
        mean_decision_index: idx as f64 / n,
        exact_fraction: exact as f64 / n,
        acceptance_rate: acc as f64 / n,
    })
}
