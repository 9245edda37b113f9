//! Cumulative distribution functions by integrating a density on a grid.

use std::cell::RefCell;

use super::quadrature::{breakpoints, gauss_legendre, integrate_split};
use crate::density::TransitionDensity;
use crate::error::{ensure_positive_time, Error, Result};

/// Cumulative values at an ascending grid, with linear interpolation between
/// grid points and clamping outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridCdf {
    pub fn eval(&self, y: f64) -> f64 {
        let g = &self.grid;
        if y <= g[0] {
            return self.values[0];
        }
        if y >= g[g.len() - 1] {
            return self.values[g.len() - 1];
        }
        let i = g.partition_point(|&v| v <= y) - 1;
        let w = (y - g[i]) / (g[i + 1] - g[i]);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}

const CELL_ORDER: usize = 10;

/// Integrates `p(t, x, ·)` from `−∞` to every point of `y_grid`.
///
/// The mass below `y_grid[0]` comes from an adaptive integral started
/// 40 standard deviations out; each grid cell is then split at the barriers
/// and integrated with a 10-point Gauss–Legendre rule.
pub fn cdf_oracle<D: TransitionDensity + ?Sized>(
    t: f64,
    x: f64,
    density: &D,
    y_grid: &[f64],
) -> Result<Vec<f64>> {
    ensure_positive_time(t)?;
    if y_grid.is_empty() {
        return Err(Error::EmptyInput("y_grid"));
    }
    if y_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("y_grid must be strictly ascending".into()));
    }
    let params = *density.params();
    let barriers = [params.z1(), params.z2()];
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let call = |y: f64| match density.value(t, x, y) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };

    let spread = 40.0 * t.sqrt() + params.mu().abs() * t;
    let lo = (x - spread).min(y_grid[0] - 1.0);
    let head = integrate_split(&call, &breakpoints(lo, y_grid[0], &barriers), 1e-13);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let mut acc = head?;
    let (nodes, weights) = gauss_legendre(CELL_ORDER);
    let mut out = Vec::with_capacity(y_grid.len());
    out.push(acc);
    for w in y_grid.windows(2) {
        for piece in breakpoints(w[0], w[1], &barriers).windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(u, wt)| wt * call(mid + half * u))
                .sum();
            acc += half * s;
        }
        out.push(acc);
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out)
}

/// [`cdf_oracle`] packaged for interpolation.
pub fn grid_cdf<D: TransitionDensity + ?Sized>(
    t: f64,
    x: f64,
    density: &D,
    y_grid: &[f64],
) -> Result<GridCdf> {
    let values = cdf_oracle(t, x, density, y_grid)?;
    Ok(GridCdf {
        grid: y_grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::fourier::{FourierOracle, QuadratureSpec};
    use crate::params::SkewParams;
    use crate::special::phi_c;

    #[test]
    fn gaussian_cdf() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.0).unwrap();
        let oracle = FourierOracle::new(p, QuadratureSpec::default());
        let grid: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
        let c = cdf_oracle(1.0, 0.0, &oracle, &grid).unwrap();
        for (y, v) in grid.iter().zip(&c) {
            assert!((v - (1.0 - phi_c(*y))).abs() < 1e-10, "{y}: {v}");
        }
    }

    #[test]
    fn monotone_and_complete() {
        let p = SkewParams::driftless(0.0, 1.0, 0.5, -0.5).unwrap();
        let oracle = FourierOracle::new(p, QuadratureSpec::default());
        let grid: Vec<f64> = (0..=120).map(|i| -5.5 + 0.1 * i as f64).collect();
        let c = cdf_oracle(1.0, 0.5, &oracle, &grid).unwrap();
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
        assert!((c[c.len() - 1] - 1.0).abs() < 1e-8);
        let g = GridCdf {
            grid: grid.clone(),
            values: c,
        };
        assert_eq!(g.eval(-100.0), g.values[0]);
        assert_eq!(g.eval(100.0), g.values[g.values.len() - 1]);
    }

    #[test]
    fn rejects_bad_grid() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.0).unwrap();
        let oracle = FourierOracle::new(p, QuadratureSpec::default());
        assert!(cdf_oracle(1.0, 0.0, &oracle, &[]).is_err());
        assert!(cdf_oracle(1.0, 0.0, &oracle, &[1.0, 0.0]).is_err());
    }
}
