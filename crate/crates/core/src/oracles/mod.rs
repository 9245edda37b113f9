//! Independent ground truth: Fourier-inversion densities, a lattice random
//! walk, goodness-of-fit statistics and structural checks.

pub mod cdf;
pub mod checks;
pub mod fourier;
pub mod quadrature;
pub mod stats;
pub mod walk;

pub use cdf::{cdf_oracle, grid_cdf, GridCdf};
pub use checks::{
    check_chapman, check_detailed_balance, check_flux, check_normalization, check_transmission,
    CheckDetail, CheckReport,
};
pub use fourier::{
    fourier_density_drift, fourier_density_driftless, FourierOracle, QuadratureRule, QuadratureSpec,
};
pub use stats::{chi_square_test, ks_statistic, ChiSquareResult, KS_CRITICAL_1PCT};
pub use walk::{skew_walk_simulate, walk_chi_square, WalkHistogram};
