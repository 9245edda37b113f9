//! Lattice random-walk approximation of skew Brownian motion.

use serde::{Deserialize, Serialize};

use super::quadrature::{breakpoints, integrate_split};
use super::stats::{chi_square_test, ChiSquareResult};
use crate::density::TransitionDensity;
use crate::error::{ensure_finite, Error, Result};
use crate::params::SkewParams;
use crate::rng::RandomStream;

/// Endpoint counts of a skew random walk, indexed by lattice node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkHistogram {
    /// Lattice spacing actually used (barriers are lattice nodes).
    pub dx: f64,
    /// Elapsed time `steps·dx²`.
    pub t: f64,
    /// Position of node `0` of `counts`.
    pub origin: f64,
    pub counts: Vec<u64>,
    pub walkers: u64,
}

impl WalkHistogram {
    pub fn position(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dx
    }
}

/// Simulates `walkers` independent walks of `steps` steps from `x0`.
///
/// Off the barriers a walker steps up with probability `½(1 + μ·dx)`; at
/// barrier node `z_j` it steps up with probability `½(1 + β_j)`. The
/// requested spacing is adjusted so `z2 − z1` is a whole number of steps,
/// and `x0` is rounded to the nearest node.
pub fn skew_walk_simulate(
    steps: usize,
    walkers: usize,
    lattice_dx: f64,
    x0: f64,
    params: &SkewParams,
    rng: &mut RandomStream,
) -> Result<WalkHistogram> {
    if steps == 0 || walkers == 0 {
        return Err(Error::Domain("steps and walkers must be positive".into()));
    }
    ensure_finite("x0", x0)?;
    if !(lattice_dx.is_finite() && lattice_dx > 0.0) {
        return Err(Error::Domain(format!(
            "lattice spacing must be positive, got {lattice_dx}"
        )));
    }
    let gap = params.gap();
    let cells = (gap / lattice_dx).round();
    if cells < 1.0 {
        return Err(Error::Configuration(format!(
            "spacing {lattice_dx} is coarser than the barrier gap {gap}"
        )));
    }
    let dx = gap / cells;
    let mu = params.mu();
    if (mu * dx).abs() >= 1.0 {
        return Err(Error::Configuration(format!(
            "|mu·dx| = {} must be < 1",
            (mu * dx).abs()
        )));
    }
    let z1 = params.z1();
    let n1: i64 = 0;
    let n2: i64 = cells as i64;
    let start = ((x0 - z1) / dx).round() as i64;

    // thresholds on a uniform u64: step up iff draw < threshold
    let to_threshold = |p: f64| -> u64 {
        if p >= 1.0 {
            u64::MAX
        } else if p <= 0.0 {
            0
        } else {
            (p * 18_446_744_073_709_551_616.0) as u64
        }
    };
    let up_b1 = to_threshold(0.5 * (1.0 + params.beta1()));
    let up_b2 = to_threshold(0.5 * (1.0 + params.beta2()));
    let up_free = to_threshold(0.5 * (1.0 + mu * dx));
    let fair = mu == 0.0;

    let lo = start - steps as i64;
    let mut counts = vec![0u64; 2 * steps + 1];
    for _ in 0..walkers {
        let mut pos = start;
        let mut bits = 0u64;
        let mut left = 0u32;
        for _ in 0..steps {
            let up = if pos == n1 {
                rng.next_u64() < up_b1
            } else if pos == n2 {
                rng.next_u64() < up_b2
            } else if fair {
                if left == 0 {
                    bits = rng.next_u64();
                    left = 64;
                }
                left -= 1;
                let b = bits & 1 == 1;
                bits >>= 1;
                b
            } else {
                rng.next_u64() < up_free
            };
            pos += if up { 1 } else { -1 };
        }
        counts[(pos - lo) as usize] += 1;
    }
    Ok(WalkHistogram {
        dx,
        t: steps as f64 * dx * dx,
        origin: z1 + lo as f64 * dx,
        counts,
        walkers: walkers as u64,
    })
}

/// Pearson test of walk endpoints against `p(t, x0, ·)`.
///
/// Reachable nodes (every other index) own the cell `[node − dx, node + dx]`.
/// Consecutive cells are merged until each bin carries about `1/bins` of the
/// target mass; the two outer bins extend to the ends of the lattice.
pub fn walk_chi_square<D: TransitionDensity + ?Sized>(
    hist: &WalkHistogram,
    x0: f64,
    density: &D,
    bins: usize,
) -> Result<ChiSquareResult> {
    if bins < 2 {
        return Err(Error::Domain(format!("need at least 2 bins, got {bins}")));
    }
    let p = *density.params();
    let barriers = [p.z1(), p.z2()];
    let failure = std::cell::RefCell::new(None);
    let f = |y: f64| match density.value(hist.t, x0, y) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let n = hist.walkers as f64;
    let share = 1.0 / bins as f64;
    let mut observed = Vec::with_capacity(bins);
    let mut expected = Vec::with_capacity(bins);
    let (mut count, mut mass) = (0u64, 0.0);
    let spread = 12.0 * hist.t.sqrt() + p.mu().abs() * hist.t;
    let mut edge = hist.position(0).min(x0 - spread);
    for i in (0..hist.counts.len()).step_by(2) {
        let hi = hist.position(i) + hist.dx;
        mass += integrate_split(&f, &breakpoints(edge, hi, &barriers), 1e-12)?;
        edge = hi;
        count += hist.counts[i];
        if mass >= share {
            observed.push(count);
            expected.push(mass * n);
            (count, mass) = (0, 0.0);
        }
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    match (observed.last_mut(), expected.last_mut()) {
        (Some(o), Some(e)) => {
            *o += count;
            *e += mass * n;
        }
        _ => return Err(Error::EmptyInput("walk histogram")),
    }
    chi_square_test(&observed, &expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflecting_lower_barrier() {
        let p = SkewParams::driftless(0.0, 1.0, 1.0, 0.3).unwrap();
        let h = skew_walk_simulate(400, 2000, 0.05, 0.1, &p, &mut RandomStream::new(2, 0)).unwrap();
        for (i, &c) in h.counts.iter().enumerate() {
            if h.position(i) < -1e-9 {
                assert_eq!(c, 0);
            }
        }
        assert_eq!(h.counts.iter().sum::<u64>(), 2000);
    }

    #[test]
    fn lattice_snaps_to_gap() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.0).unwrap();
        let h = skew_walk_simulate(10, 10, 0.3, 0.0, &p, &mut RandomStream::new(2, 0)).unwrap();
        assert!((h.dx - 1.0 / 3.0).abs() < 1e-15);
        assert!(skew_walk_simulate(10, 10, 3.0, 0.0, &p, &mut RandomStream::new(2, 0)).is_err());
    }

    #[test]
    fn fair_walk_variance() {
        let p = SkewParams::driftless(0.0, 1.0, 0.0, 0.0).unwrap();
        let h =
            skew_walk_simulate(100, 20_000, 0.1, 0.0, &p, &mut RandomStream::new(4, 0)).unwrap();
        let n = h.walkers as f64;
        let mean: f64 = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * h.position(i))
            .sum::<f64>()
            / n;
        let var: f64 = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * (h.position(i) - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!((var - h.t).abs() < 0.05 * h.t);
    }
}
