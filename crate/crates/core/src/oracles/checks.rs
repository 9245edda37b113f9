//! Analytic-structure checks shared by every density evaluator.

use serde::{Deserialize, Serialize};

use super::quadrature::{breakpoints, integrate_split};
use crate::density::TransitionDensity;
use crate::error::{ensure_positive_time, Error, Result};

/// Machine-readable outcome of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Largest observed violation, in the units of `tolerance`.
    pub max_residual: f64,
    pub tolerance: f64,
    pub details: Vec<CheckDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDetail {
    pub label: String,
    pub residual: f64,
}

impl CheckReport {
    fn from_details(name: &str, tolerance: f64, details: Vec<CheckDetail>) -> Self {
        let max_residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
        let finite = details.iter().all(|d| d.residual.is_finite());
        Self {
            name: name.to_string(),
            passed: finite && max_residual <= tolerance,
            max_residual,
            tolerance,
            details,
        }
    }
}

/// Offset used for one-sided limits at a barrier.
pub const SIDE_OFFSET: f64 = 1e-9;
const FLUX_STEP: f64 = 1e-5;

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Jump condition `(1+β_j)p(z_j⁻) = (1−β_j)p(z_j⁺)` at both barriers,
/// relative to the larger one-sided density (one side vanishes when `|β_j| = 1`).
pub fn check_transmission<D: TransitionDensity + ?Sized>(
    t: f64,
    x: f64,
    density: &D,
    tol: f64,
) -> Result<CheckReport> {
    ensure_positive_time(t)?;
    let p = *density.params();
    let mut details = Vec::new();
    for (label, z, b) in [("z1", p.z1(), p.beta1()), ("z2", p.z2(), p.beta2())] {
        let below = density.value(t, x, z - SIDE_OFFSET)?;
        let above = density.value(t, x, z + SIDE_OFFSET)?;
        details.push(CheckDetail {
            label: format!("jump at {label}"),
            residual: ((1.0 + b) * below - (1.0 - b) * above).abs()
                / below.abs().max(above.abs()).max(f64::MIN_POSITIVE),
        });
    }
    Ok(CheckReport::from_details("transmission", tol, details))
}

/// Continuity of `½∂_y p − μp` across both barriers from second-order
/// one-sided differences with step `1e-5`.
pub fn check_flux<D: TransitionDensity + ?Sized>(
    t: f64,
    x: f64,
    density: &D,
    tol: f64,
) -> Result<CheckReport> {
    ensure_positive_time(t)?;
    let p = *density.params();
    let mu = p.mu();
    let h = FLUX_STEP;
    let mut details = Vec::new();
    for (label, z) in [("z1", p.z1()), ("z2", p.z2())] {
        let l0 = z - SIDE_OFFSET;
        let r0 = z + SIDE_OFFSET;
        let f = |y: f64| density.value(t, x, y);
        let (l_0, l_1, l_2) = (f(l0)?, f(l0 - h)?, f(l0 - 2.0 * h)?);
        let (r_0, r_1, r_2) = (f(r0)?, f(r0 + h)?, f(r0 + 2.0 * h)?);
        let dl = (3.0 * l_0 - 4.0 * l_1 + l_2) / (2.0 * h);
        let dr = (-3.0 * r_0 + 4.0 * r_1 - r_2) / (2.0 * h);
        let fl = 0.5 * dl - mu * l_0;
        let fr = 0.5 * dr - mu * r_0;
        let scale = fl.abs().max(fr.abs()).max(l_0.abs()).max(r_0.abs());
        details.push(CheckDetail {
            label: format!("flux at {label}"),
            residual: if scale == 0.0 {
                0.0
            } else {
                (fl - fr).abs() / scale
            },
        });
    }
    Ok(CheckReport::from_details("flux", tol, details))
}

fn window<D: TransitionDensity + ?Sized>(t: f64, lo: f64, hi: f64, density: &D) -> Vec<f64> {
    let p = density.params();
    let spread = 12.0 * t.sqrt() + p.mu().abs() * t;
    breakpoints(lo - spread, hi + spread, &[p.z1(), p.z2()])
}

/// `|∫ p(t, x, y) dy − 1|` with the integral split at the barriers.
pub fn check_normalization<D: TransitionDensity + ?Sized>(
    t: f64,
    x: f64,
    density: &D,
    tol: f64,
) -> Result<CheckReport> {
    ensure_positive_time(t)?;
    let mass = integrate(|y| density.value(t, x, y), &window(t, x, x, density))?;
    Ok(CheckReport::from_details(
        "normalization",
        tol,
        vec![CheckDetail {
            label: format!("x = {x}"),
            residual: (mass - 1.0).abs(),
        }],
    ))
}

fn integrate<F: Fn(f64) -> Result<f64>>(f: F, breaks: &[f64]) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let g = |y: f64| match f(y) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let r = integrate_split(&g, breaks, 1e-11);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r
}

/// Chapman–Kolmogorov: `∫ p(t,x,w) p(s,w,y) dw` against `p(t+s,x,y)` at
/// each `(x, y)` pair, as a relative residual.
pub fn check_chapman<D: TransitionDensity + ?Sized>(
    t: f64,
    s: f64,
    pairs: &[(f64, f64)],
    density: &D,
    tol: f64,
) -> Result<CheckReport> {
    ensure_positive_time(t)?;
    ensure_positive_time(s)?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pairs"));
    }
    let mut details = Vec::new();
    for &(x, y) in pairs {
        let breaks = window(t.max(s), x.min(y), x.max(y), density);
        let conv = integrate(
            |w| Ok(density.value(t, x, w)? * density.value(s, w, y)?),
            &breaks,
        )?;
        let direct = density.value(t + s, x, y)?;
        details.push(CheckDetail {
            label: format!("x = {x}, y = {y}"),
            residual: rel(conv, direct),
        });
    }
    Ok(CheckReport::from_details(
        "chapman_kolmogorov",
        tol,
        details,
    ))
}

/// Detailed balance `h(x)p(t,x,y) = h(y)p(t,y,x)` as a relative residual.
pub fn check_detailed_balance<D: TransitionDensity + ?Sized>(
    t: f64,
    pairs: &[(f64, f64)],
    density: &D,
    tol: f64,
) -> Result<CheckReport> {
    ensure_positive_time(t)?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pairs"));
    }
    let p = *density.params();
    let mut details = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let fwd = p.weight_h(x) * density.value(t, x, y)?;
        let bwd = p.weight_h(y) * density.value(t, y, x)?;
        details.push(CheckDetail {
            label: format!("x = {x}, y = {y}"),
            residual: rel(fwd, bwd),
        });
    }
    Ok(CheckReport::from_details("detailed_balance", tol, details))
}
