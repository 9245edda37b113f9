//! Overflow-safe scalar kernels.
//!
//! Gaussian density and tails, probabilists' Hermite polynomials, truncated
//! Gaussian moments and the `J`, `S`, `𝒢`, `ℱ` building blocks of the drifted
//! two-barrier series. Everything that multiplies a huge exponential by a tiny
//! Gaussian tail goes through [`scaled_normal_tail`] so the two factors are
//! never formed separately.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{ensure_finite, Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Largest `n` for which `n!` is finite in double precision.
pub const FACTORIAL_CAP: usize = 170;

// ---------------------------------------------------------------------------
// Cody's rational approximations for erfc / erfcx.

const ERF_A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_16,
    377.485_237_685_302_02,
    3_209.377_589_138_469_4,
    0.185_777_706_184_603_15,
];
const ERF_B: [f64; 4] = [
    23.601_290_952_344_122,
    244.024_637_934_444_17,
    1_282.616_526_077_372_3,
    2_844.236_833_439_170_6,
];
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769_1,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_6,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_7,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_26,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_5,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const ERF_SMALL: f64 = 0.468_75;

fn erf_small(z: f64) -> f64 {
    ((((ERF_A[4] * z + ERF_A[0]) * z + ERF_A[1]) * z + ERF_A[2]) * z + ERF_A[3])
        / ((((z + ERF_B[0]) * z + ERF_B[1]) * z + ERF_B[2]) * z + ERF_B[3])
}

/// `erfcx(y)` for `y > 0.46875`.
fn erfcx_large(y: f64) -> f64 {
    if y <= 4.0 {
        let c = &ERFC_C;
        let d = &ERFC_D;
        let num = ((((((((c[8] * y + c[0]) * y + c[1]) * y + c[2]) * y + c[3]) * y + c[4]) * y
            + c[5])
            * y
            + c[6])
            * y)
            + c[7];
        let den = ((((((((y + d[0]) * y + d[1]) * y + d[2]) * y + d[3]) * y + d[4]) * y + d[5])
            * y
            + d[6])
            * y)
            + d[7];
        num / den
    } else {
        let z = 1.0 / (y * y);
        let p = &ERFC_P;
        let q = &ERFC_Q;
        let r = z * (((((p[5] * z + p[0]) * z + p[1]) * z + p[2]) * z + p[3]) * z + p[4])
            / (((((z + q[0]) * z + q[1]) * z + q[2]) * z + q[3]) * z + q[4]);
        (FRAC_1_SQRT_PI - r) / y
    }
}

/// `exp(-y²)` split as `exp(-ỹ²)·exp(-(y-ỹ)(y+ỹ))` with `ỹ` on a 1/16 grid.
fn exp_neg_square(y: f64) -> f64 {
    let yt = (y * 16.0).trunc() / 16.0;
    (-yt * yt).exp() * (-(y - yt) * (y + yt)).exp()
}

fn exp_pos_square(x: f64) -> f64 {
    let xt = (x * 16.0).trunc() / 16.0;
    (xt * xt).exp() * ((x - xt) * (x + xt)).exp()
}

pub(crate) fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_SMALL {
        return 1.0 - x * erf_small(y * y);
    }
    let tail = if y >= 26.543 {
        0.0
    } else {
        erfcx_large(y) * exp_neg_square(y)
    };
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// `exp(x²)·erfc(x)`.
pub(crate) fn erfcx(x: f64) -> f64 {
    let y = x.abs();
    if y <= ERF_SMALL {
        let z = y * y;
        return z.exp() * (1.0 - x * erf_small(z));
    }
    if x < -26.628_735_713_751_4 {
        return f64::INFINITY;
    }
    let r = erfcx_large(y);
    if x < 0.0 {
        2.0 * exp_pos_square(x) - r
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Unchecked kernels used throughout the crate.

#[inline]
pub(crate) fn phi(u: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * u * u).exp()
}

#[inline]
pub(crate) fn phi_c(u: f64) -> f64 {
    0.5 * erfc(u * FRAC_1_SQRT_2)
}

/// Mills ratio form `exp(u²/2)·Φᶜ(u)`.
#[inline]
pub(crate) fn mills(u: f64) -> f64 {
    0.5 * erfcx(u * FRAC_1_SQRT_2)
}

// ---------------------------------------------------------------------------
// Public checked operations.

/// Standard Gaussian density `(2π)^{-1/2} exp(-u²/2)`.
///
/// Beyond `|u| ≈ 38.5` the value is below the smallest subnormal and the
/// result is `+0.0`; use [`ln_normal_pdf`] when the magnitude matters there.
pub fn normal_pdf(u: f64) -> Result<f64> {
    ensure_finite("u", u)?;
    Ok(phi(u))
}

pub fn ln_normal_pdf(u: f64) -> Result<f64> {
    ensure_finite("u", u)?;
    Ok(-0.5 * u * u - 0.5 * (2.0 * PI).ln())
}

/// Upper Gaussian tail `Φᶜ(u) = P(N(0,1) > u)`.
pub fn normal_tail(u: f64) -> Result<f64> {
    ensure_finite("u", u)?;
    Ok(phi_c(u))
}

/// `exp(u²/2)·Φᶜ(u)` as one fused evaluation.
///
/// For large positive `u` this behaves like `1/(u√(2π))`; for very negative
/// `u` it grows like `√(2π)·exp(u²/2)` and overflows to infinity once that is
/// not representable.
pub fn scaled_normal_tail(u: f64) -> Result<f64> {
    ensure_finite("u", u)?;
    Ok(mills(u))
}

/// Probabilists' Hermite polynomial `He_n(w)`, with
/// `dⁿ/dwⁿ e^{-w²/2} = (-1)ⁿ e^{-w²/2} He_n(w)`.
pub fn hermite_prob(n: usize, w: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = w;
    for k in 1..n {
        let next = w * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------------------
// Factorials.

fn factorial_table() -> &'static [f64; FACTORIAL_CAP + 1] {
    static TABLE: OnceLock<[f64; FACTORIAL_CAP + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACTORIAL_CAP + 1];
        for i in 1..=FACTORIAL_CAP {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// `n!`, infinite beyond [`FACTORIAL_CAP`].
pub fn factorial(n: usize) -> f64 {
    factorial_table().get(n).copied().unwrap_or(f64::INFINITY)
}

pub fn ln_factorial(n: usize) -> f64 {
    if n <= FACTORIAL_CAP {
        return factorial_table()[n].ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `Π numer[i]! / Π denom[j]!`, switching to log space past the factorial cap.
pub fn factorial_ratio(numer: &[usize], denom: &[usize]) -> f64 {
    let fits = numer.iter().chain(denom).all(|&k| k <= FACTORIAL_CAP);
    if fits {
        let mut r = 1.0;
        for &k in numer {
            r *= factorial(k);
        }
        for &k in denom {
            r /= factorial(k);
        }
        if r.is_finite() && r > 0.0 {
            return r;
        }
    }
    let ln: f64 = numer.iter().map(|&k| ln_factorial(k)).sum::<f64>()
        - denom.iter().map(|&k| ln_factorial(k)).sum::<f64>();
    ln.exp()
}

const PASCAL_ROWS: usize = 256;

fn pascal() -> &'static Vec<Vec<f64>> {
    static ROWS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
        for n in 1..PASCAL_ROWS {
            let prev = &rows[n - 1];
            let mut row = vec![1.0; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        rows
    })
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n < PASCAL_ROWS {
        return pascal()[n][k];
    }
    factorial_ratio(&[n], &[k, n - k]).round_if_small()
}

trait RoundIfSmall {
    fn round_if_small(self) -> Self;
}

impl RoundIfSmall for f64 {
    // Binomials below 2^53 are integers; the log-space path may be off by an ulp.
    fn round_if_small(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// `(q-1)!!` with the convention `(-1)!! = 1`; returns the even full moment
/// ratio `∫ v^q e^{-v²/2} dv / √(2π)` for even `q`.
fn odd_double_factorial(q: usize) -> f64 {
    let mut r = 1.0;
    let mut k = q as i64 - 1;
    while k > 1 {
        r *= k as f64;
        k -= 2;
    }
    r
}

// ---------------------------------------------------------------------------
// Truncated Gaussian moments.

/// Which side of `α` a truncated moment integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSide {
    /// `I_q(α) = ∫_{-∞}^{α} v^q e^{-v²/2} dv`
    LowerTail,
    /// `Ĩ_q(α) = ∫_{α}^{∞} v^q e^{-v²/2} dv`
    UpperTail,
}

/// `∫_ℝ v^q e^{-v²/2} dv`.
pub fn full_gaussian_moment(q: usize) -> f64 {
    if q % 2 == 1 {
        0.0
    } else {
        SQRT_2PI * odd_double_factorial(q)
    }
}

/// `e^{log_weight + c²/2}·∫_c^∞ v^q e^{-v²/2} dv` for `q = 0..=q_max`, `c ≥ 0`.
///
/// Runs the all-positive recursion `T_q = c^{q-1} e^{-c²/2} + (q-1) T_{q-2}`,
/// which is stable in the upward direction for non-negative `c`. The caller
/// folds any outer exponential into `log_weight` so that nothing overflows.
fn upper_tail_moments(c: f64, q_max: usize, log_weight: f64) -> Vec<f64> {
    debug_assert!(c >= 0.0);
    let w = log_weight.exp();
    let mut out = Vec::with_capacity(q_max + 1);
    out.push(SQRT_2PI * mills(c) * w);
    if q_max >= 1 {
        out.push(w);
    }
    let mut cpow = 1.0; // c^{q-1}, starting at q = 1
    for q in 2..=q_max {
        cpow *= c;
        let v = cpow * w + (q - 1) as f64 * out[q - 2];
        out.push(v);
    }
    out
}

/// Truncated Gaussian moment `I_q(α)` (lower tail) or `Ĩ_q(α)` (upper tail).
pub fn gaussian_moment(side: MomentSide, q: usize, alpha: f64) -> f64 {
    match side {
        MomentSide::UpperTail => upper_moment(q, alpha),
        // v -> -v maps the lower tail at α onto the upper tail at -α.
        MomentSide::LowerTail => {
            let u = upper_moment(q, -alpha);
            if q % 2 == 0 {
                u
            } else {
                -u
            }
        }
    }
}

fn upper_moment(q: usize, alpha: f64) -> f64 {
    if alpha >= 0.0 {
        upper_tail_moments(alpha, q, -0.5 * alpha * alpha)[q]
    } else {
        // ∫_α^∞ = full − ∫_{-∞}^{α} and ∫_{-∞}^{α} v^q = (-1)^q ∫_{|α|}^∞ v^q.
        let mirrored = upper_tail_moments(-alpha, q, -0.5 * alpha * alpha)[q];
        if q % 2 == 0 {
            full_gaussian_moment(q) - mirrored
        } else {
            mirrored
        }
    }
}

// ---------------------------------------------------------------------------
// J, S, 𝒢, ℱ.

/// Memoized `J_0..=J_{q_max}` at one `(ω, A)` pair.
///
/// `J_q(ω, A) = e^{A²/2 + Aω} I_q(-(ω + A))` for `A ≥ 0` and
/// `-e^{A²/2 + Aω} Ĩ_q(-(ω + A))` for `A < 0`. All values carry the factor
/// `e^{-ω²/2}` implicitly through the stable tail recursion.
#[derive(Debug, Clone)]
pub struct JTable {
    omega: f64,
    a: f64,
    values: Vec<f64>,
    /// `shifted[p][r] = Σ_s C(p,s) A^{p−s} J_{r+s}` for `p + r ≤ q_max`.
    shifted: Vec<Vec<f64>>,
}

impl JTable {
    pub fn new(q_max: usize, omega: f64, a: f64) -> Self {
        let c = omega + a;
        let base = -0.5 * omega * omega;
        let values = if a >= 0.0 {
            if c >= 0.0 {
                let mut v = upper_tail_moments(c, q_max, base);
                for (q, x) in v.iter_mut().enumerate() {
                    if q % 2 == 1 {
                        *x = -*x;
                    }
                }
                v
            } else {
                // I_q(|c|) = full − Ĩ_q(|c|); the outer exponent is ≤ -A²/2 here.
                let outer = (0.5 * a * a + a * omega).exp();
                let tails = upper_tail_moments(-c, q_max, base);
                (0..=q_max)
                    .map(|q| outer * full_gaussian_moment(q) - tails[q])
                    .collect()
            }
        } else if c <= 0.0 {
            upper_tail_moments(-c, q_max, base)
                .into_iter()
                .map(|x| -x)
                .collect()
        } else {
            // Ĩ_q(-c) = full − (-1)^q Ĩ_q(c)
            let outer = (0.5 * a * a + a * omega).exp();
            let tails = upper_tail_moments(c, q_max, base);
            (0..=q_max)
                .map(|q| {
                    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                    -(outer * full_gaussian_moment(q) - sign * tails[q])
                })
                .collect()
        };
        let mut shifted = Vec::with_capacity(values.len());
        shifted.push(values.clone());
        for p in 1..values.len() {
            let prev: &Vec<f64> = &shifted[p - 1];
            let row = (0..prev.len() - 1)
                .map(|r| prev[r + 1] + a * prev[r])
                .collect();
            shifted.push(row);
        }
        Self {
            omega,
            a,
            values,
            shifted,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q_max(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn get(&self, q: usize) -> f64 {
        self.values[q]
    }

    /// `S^h_{m,n,ℓ}` from this table; the table must reach `q = n + 2(m-ℓ) + h`.
    pub fn s(&self, h: usize, m: usize, n: usize, l: usize) -> f64 {
        let p = 2 * m + h - 2 * l;
        let c = self.omega + self.a;
        let row = &self.shifted[p];
        let mut total = 0.0;
        let mut cp = 1.0;
        for r in (0..=n).rev() {
            total += binomial(n, r) * cp * row[r];
            cp *= c;
        }
        total
    }

    /// `𝒢^h_{m,n}`: the alternating ℓ-sum of `S` with Hermite coefficients.
    pub fn g(&self, h: usize, m: usize, n: usize) -> f64 {
        let deg = 2 * m + h;
        let mut total = 0.0;
        for l in 0..=(m + h / 2) {
            let coef = factorial_ratio(&[deg], &[l, deg - 2 * l]) / 2f64.powi(l as i32);
            let sign = if (l + h) % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * coef * self.s(h, m, n, l);
        }
        total
    }
}

fn check_h(h: usize) -> Result<()> {
    if h > 2 {
        Err(Error::Domain(format!("h must be 0, 1 or 2, got {h}")))
    } else {
        Ok(())
    }
}

/// `J_q(ω, A)`.
pub fn j_func(q: usize, omega: f64, a: f64) -> Result<f64> {
    ensure_finite("omega", omega)?;
    ensure_finite("A", a)?;
    Ok(JTable::new(q, omega, a).get(q))
}

/// `S^h_{m,n,ℓ}(ω, A)`, the double binomial sum over `J_{r+s}`.
pub fn s_func(h: usize, m: usize, n: usize, l: usize, omega: f64, a: f64) -> Result<f64> {
    check_h(h)?;
    ensure_finite("omega", omega)?;
    ensure_finite("A", a)?;
    if l > m + h / 2 {
        return Err(Error::Domain(format!(
            "index l = {l} exceeds m + floor(h/2) = {}",
            m + h / 2
        )));
    }
    let table = JTable::new(n + 2 * m + h - 2 * l, omega, a);
    Ok(table.s(h, m, n, l))
}

/// `𝒢^h_{m,n}(ω, A)`.
pub fn g_script(h: usize, m: usize, n: usize, omega: f64, a: f64) -> Result<f64> {
    check_h(h)?;
    ensure_finite("omega", omega)?;
    ensure_finite("A", a)?;
    let table = JTable::new(n + 2 * m + h, omega, a);
    Ok(table.g(h, m, n))
}

/// `ℱ^h_{m,n}(ω) = 𝒢^h_{m,n}(ω, A2) − (−1)ⁿ 𝒢^h_{m,n}(ω, A1)`.
pub fn f_script(h: usize, m: usize, n: usize, omega: f64, a1: f64, a2: f64) -> Result<f64> {
    if a1 == a2 {
        return Err(Error::Domain(
            "A1 = A2: equal skewness uses the same-beta series instead".into(),
        ));
    }
    let g2 = g_script(h, m, n, omega, a2)?;
    let g1 = g_script(h, m, n, omega, a1)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(g2 - sign * g1)
}
