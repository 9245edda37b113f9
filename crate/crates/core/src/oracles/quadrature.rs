//! Composite quadrature with node doubling.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) const GL_ORDER: usize = 20;

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// 20-point Gauss–Legendre on `panels` equal panels of `[a, b]`.
pub fn gl_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gl20();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let s: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        total += half * s;
    }
    total
}

/// Trapezoid rule on `[0, w_max]` with step `h` for an even integrand,
/// returning half the full-line sum.
pub fn half_line_trapezoid<F: Fn(f64) -> f64>(f: &F, h: f64, w_max: f64) -> f64 {
    let n = (w_max / h).ceil() as usize;
    let mut total = 0.5 * f(0.0);
    for k in 1..=n {
        total += f(k as f64 * h);
    }
    h * total
}

/// Doubles the panel count from `panels` until two successive values agree
/// to `tol` (absolute); at most `max_doublings` times.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut n = panels.max(1);
    let mut prev = gl_panels(f, a, b, n);
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        n *= 2;
        let next = gl_panels(f, a, b, n);
        change = (next - prev).abs();
        prev = next;
        if change <= tol {
            return Ok(prev);
        }
    }
    Err(Error::ToleranceNotMet {
        tolerance: tol,
        achieved: change,
    })
}

/// [`integrate_panels`] over consecutive sub-intervals between sorted
/// `breaks`, so that integrand kinks sit on panel boundaries.
pub fn integrate_split<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = ((b - a) / 0.5).ceil().max(1.0) as usize;
        total += integrate_panels(f, a, b, panels, tol / pieces, 12)?;
    }
    Ok(total)
}

/// Sorted break points: `[lo, hi]` with every interior point of `inner` added.
pub fn breakpoints(lo: f64, hi: f64, inner: &[f64]) -> Vec<f64> {
    let mut b = vec![lo, hi];
    b.extend(inner.iter().copied().filter(|&z| z > lo && z < hi));
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup();
    b
}
