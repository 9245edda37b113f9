use super::{coeffs_drift, gaussian_kernel, path_lengths, TransitionDensity};
use crate::error::{ensure_finite, ensure_positive_time, Error, Result};
use crate::params::{DensityValue, SkewParams, TruncationPolicy};
use crate::special::{binomial, factorial_ratio, JTable, SQRT_2PI};

/// Which closed form evaluates the drifted two-barrier series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftBranch {
    /// Partial fractions in `1/(β1 − β2)`; loses all precision as `β1 → β2`.
    Distinct,
    /// The `β1 = β2` series.
    Equal,
    /// Taylor expansion in `β1 − β2` around the larger coefficient.
    NearEqual,
}

/// Relative skewness separation below which the router leaves the
/// partial-fraction form.
const NEAR_EQUAL_SPLIT: f64 = 0.5;
const TAYLOR_MAX_ORDER: usize = 200;
const QUIET_TERMS: usize = 3;

fn select_branch(b1: f64, b2: f64) -> DriftBranch {
    if b1 == b2 {
        DriftBranch::Equal
    } else if (b1 - b2).abs() <= NEAR_EQUAL_SPLIT * b1.abs().max(b2.abs()) {
        DriftBranch::NearEqual
    } else {
        DriftBranch::Distinct
    }
}

#[inline]
fn alt(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

struct Setup {
    c: [[f64; 4]; 3],
    a: [f64; 4],
    d: f64,
    two_z: f64,
    st: f64,
    mp: f64,
    b1: f64,
    b2: f64,
}

impl Setup {
    fn omega(&self, j: usize, k: usize) -> f64 {
        (self.a[j] + self.two_z * k as f64 + self.d) / self.st
    }

    /// `c_{j,2−h}`
    fn coef(&self, j: usize, h: usize) -> f64 {
        self.c[2 - h][j]
    }

    fn term(&self, branch: DriftBranch, k: usize) -> f64 {
        match branch {
            DriftBranch::Distinct => self.term_distinct(k),
            DriftBranch::Equal => self.term_equal(k),
            DriftBranch::NearEqual => self.term_near_equal(k),
        }
    }

    fn term_distinct(&self, k: usize) -> f64 {
        let (b1, b2, mp) = (self.b1, self.b2, self.mp);
        let diff = b1 - b2;
        let q_max = 3 * k + 2;
        let mut total = 0.0;
        for j in 0..4 {
            if (0..3).all(|h| self.coef(j, h) == 0.0) {
                continue;
            }
            let w = self.omega(j, k);
            let t1 = JTable::new(q_max, w, b1 * mp);
            let t2 = JTable::new(q_max, w, b2 * mp);
            for n in 0..=k {
                for m in 0..=k {
                    let coef = alt(m)
                        * factorial_ratio(&[2 * k - n], &[k - n, k - m, n, m])
                        * mp.powi(n as i32 + 1 - 2 * m as i32)
                        / diff.powi((2 * k - n) as i32);
                    let mut inner = 0.0;
                    for h in 0..3 {
                        let c = self.coef(j, h);
                        if c == 0.0 {
                            continue;
                        }
                        let f = t2.g(h, m, n) - alt(n) * t1.g(h, m, n);
                        inner += c / mp.powi(h as i32) * f;
                    }
                    total += coef * inner;
                }
            }
        }
        (-b1 * b2).powi(k as i32) / diff * total
    }

    fn term_equal(&self, k: usize) -> f64 {
        let (b, mp) = (self.b1, self.mp);
        let n = 2 * k + 1;
        let q_max = n + 2 * k + 2;
        let lead = b.powi(2 * k as i32) * factorial_ratio(&[], &[n]);
        let mut total = 0.0;
        for j in 0..4 {
            let w = self.omega(j, k);
            let table = JTable::new(q_max, w, b * mp);
            for h in 0..3 {
                let c = self.coef(j, h);
                if c == 0.0 {
                    continue;
                }
                for m in 0..=k {
                    total += binomial(k, m)
                        * -alt(m)
                        * mp.powi((2 * (k - m) + 2 - h) as i32)
                        * c
                        * table.g(h, m, n);
                }
            }
        }
        lead * total
    }

    fn term_near_equal(&self, k: usize) -> f64 {
        let (a1, a2) = (self.b1 * self.mp, self.b2 * self.mp);
        let base = a1.max(a2);
        let delta = a1.min(a2) - base;
        let mp = self.mp;
        let mut total = 0.0;
        for j in 0..4 {
            if (0..3).all(|h| self.coef(j, h) == 0.0) {
                continue;
            }
            let w = self.omega(j, k);
            let mut table = JTable::new(4 * k + 3 + 16, w, base);
            let mut sum_j = 0.0;
            let mut quiet = 0;
            let mut peak: f64 = 0.0;
            for r in 0..=TAYLOR_MAX_ORDER {
                let n = 2 * k + 1 + r;
                if n + 2 * k + 2 > table.q_max() {
                    table = JTable::new(2 * table.q_max() + 2, w, base);
                }
                let weight = delta.powi(r as i32) * factorial_ratio(&[k + r], &[r, n]);
                if weight == 0.0 {
                    break;
                }
                let mut inner = 0.0;
                for h in 0..3 {
                    let c = self.coef(j, h);
                    if c == 0.0 {
                        continue;
                    }
                    let mut s = 0.0;
                    for m in 0..=k {
                        s += binomial(k, m)
                            * mp.powi(2 * (k - m) as i32)
                            * alt(m)
                            * table.g(h, m, n);
                    }
                    inner += c * mp.powi((2 - h) as i32) * s;
                }
                let piece = weight * inner;
                sum_j += piece;
                peak = peak.max(piece.abs());
                if piece.abs() <= 1e-17 * sum_j.abs().max(peak) {
                    quiet += 1;
                    if quiet >= 2 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            total += sum_j;
        }
        let b = self.b1 * self.b2;
        (-b).powi(k as i32) * -alt(k) * factorial_ratio(&[], &[k]) * total
    }
}

fn check_drift(t: f64, x: f64, y: f64, params: &SkewParams) -> Result<()> {
    ensure_positive_time(t)?;
    ensure_finite("x", x)?;
    ensure_finite("y", y)?;
    let mu = params.mu();
    if !(params.beta1() * mu > 0.0 && params.beta2() * mu > 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "the drifted two-barrier series needs beta1*mu > 0 and beta2*mu > 0 \
             (got beta1={}, beta2={}, mu={}); opposite-sign regimes are not covered",
            params.beta1(),
            params.beta2(),
            mu
        )));
    }
    Ok(())
}

/// Drifted two-barrier density through an explicitly chosen branch.
///
/// The `k`-series stops at `policy.n_max()` or after three successive terms
/// each below `tol·p^{(0)}_μ`; the reported bound is the magnitude of those
/// last terms and is not rigorous.
pub fn density_two_barrier_drift_branch(
    t: f64,
    x: f64,
    y: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
    branch: DriftBranch,
) -> Result<DensityValue> {
    check_drift(t, x, y, params)?;
    let (b1, b2) = (params.beta1(), params.beta2());
    match branch {
        DriftBranch::Equal if b1 != b2 => {
            return Err(Error::Domain(format!(
                "equal-skewness branch needs beta1 = beta2, got {b1} and {b2}"
            )))
        }
        DriftBranch::Distinct | DriftBranch::NearEqual if b1 == b2 => {
            return Err(Error::Domain(
                "beta1 = beta2: use the equal-skewness branch".into(),
            ))
        }
        _ => {}
    }
    let mu = params.mu();
    let st = t.sqrt();
    let setup = Setup {
        c: coeffs_drift(y, params),
        a: path_lengths(x, y, params),
        d: (y - x).abs(),
        two_z: 2.0 * params.gap(),
        st,
        mp: mu * st,
        b1,
        b2,
    };
    let pref = (mu * (y - x) - 0.5 * mu * mu * t).exp() / (SQRT_2PI * st);
    let floor = policy.tol() * gaussian_kernel(t, x, y, mu);

    let mut value = 0.0;
    let mut recent = [f64::INFINITY; QUIET_TERMS];
    let mut terms = 0;
    for k in 0..=policy.n_max() {
        let term = pref * setup.term(branch, k);
        value += term;
        terms = k + 1;
        recent[k % QUIET_TERMS] = term.abs();
        if k + 1 >= QUIET_TERMS && recent.iter().all(|&r| r < floor) {
            break;
        }
    }
    let tail = recent.iter().filter(|r| r.is_finite()).sum::<f64>();
    Ok(DensityValue {
        value,
        error_bound: tail,
        terms_used: terms,
        exact_formula: false,
        rigorous_bound: false,
    })
}

/// Drifted two-barrier density; picks the equal, near-equal or distinct
/// skewness branch automatically.
pub fn density_two_barrier_drift(
    t: f64,
    x: f64,
    y: f64,
    params: &SkewParams,
    policy: &TruncationPolicy,
) -> Result<DensityValue> {
    let branch = select_branch(params.beta1(), params.beta2());
    density_two_barrier_drift_branch(t, x, y, params, policy, branch)
}

/// [`density_two_barrier_drift`] bound to one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct DriftSeries {
    params: SkewParams,
    policy: TruncationPolicy,
}

impl DriftSeries {
    pub fn new(params: SkewParams, policy: TruncationPolicy) -> Result<Self> {
        check_drift(1.0, 0.0, 0.0, &params)?;
        Ok(Self { params, policy })
    }
}

impl TransitionDensity for DriftSeries {
    fn params(&self) -> &SkewParams {
        &self.params
    }

    fn density(&self, t: f64, x: f64, y: f64) -> Result<DensityValue> {
        density_two_barrier_drift(t, x, y, &self.params, &self.policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn router() {
        assert_eq!(select_branch(0.3, 0.3), DriftBranch::Equal);
        assert_eq!(
            select_branch(0.3, 0.3 * (1.0 + 1e-9)),
            DriftBranch::NearEqual
        );
        assert_eq!(select_branch(0.4, 0.2), DriftBranch::NearEqual);
        assert_eq!(select_branch(0.6, 0.1), DriftBranch::Distinct);
    }

    #[test]
    fn sign_precondition() {
        let pol = TruncationPolicy::default();
        let p = SkewParams::new(0.0, 1.0, 0.4, -0.2, 1.0).unwrap();
        assert!(matches!(
            density_two_barrier_drift(1.0, 0.5, 0.3, &p, &pol),
            Err(Error::UnsupportedRegime(_))
        ));
        let p = SkewParams::new(0.0, 1.0, 0.4, 0.2, 0.0).unwrap();
        assert!(density_two_barrier_drift(1.0, 0.5, 0.3, &p, &pol).is_err());
    }

    #[test]
    fn branch_mismatch_rejected() {
        let pol = TruncationPolicy::default();
        let p = SkewParams::new(0.0, 1.0, 0.3, 0.3, 1.0).unwrap();
        assert!(
            density_two_barrier_drift_branch(1.0, 0.5, 0.3, &p, &pol, DriftBranch::Distinct)
                .is_err()
        );
        let p = SkewParams::new(0.0, 1.0, 0.4, 0.2, 1.0).unwrap();
        assert!(
            density_two_barrier_drift_branch(1.0, 0.5, 0.3, &p, &pol, DriftBranch::Equal).is_err()
        );
    }

    #[test]
    fn heuristic_bound_flagged() {
        let p = SkewParams::new(0.0, 1.0, 0.4, 0.2, 1.0).unwrap();
        let d = density_two_barrier_drift(1.0, 0.5, 0.3, &p, &TruncationPolicy::default()).unwrap();
        assert!(!d.exact_formula && !d.rigorous_bound);
        assert!(d.value > 0.0);
    }
}
