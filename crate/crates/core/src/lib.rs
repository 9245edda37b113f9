//! Transition densities and exact simulation for skew Brownian motion with
//! two semipermeable barriers.
//!
//! * [`density`]: driftless series, one-barrier closed form with drift and
//!   the drifted two-barrier series.
//! * [`sampler`]: exact rejection sampling of the driftless process.
//! * [`oracles`]: quadrature, random-walk and statistical cross-checks.
//! * [`special`]: Gaussian tails, Hermite polynomials, truncated moments.

pub mod density;
pub mod error;
pub mod oracles;
pub mod params;
pub mod rng;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use params::{DensityValue, SkewParams, TruncationPolicy};
pub use rng::RandomStream;
