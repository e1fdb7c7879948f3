//! Covariance kernels, the additive-band certificates built on them,
//! trajectory distances and rate fits.
//!
//! Pointwise (`W^{-s,inf}`) norms are replaced by the `H^{-s}` norms of the
//! Fourier coefficients throughout.

mod covariance;
mod kernels;
mod reports;

pub use covariance::{
    cov_difference_check, covariance_band, covariance_gamma, potential_j, torus_norm,
    CovarianceKernel, CovarianceReport, DifferenceReport, ProbeGrid, DEFAULT_BAND_WIDTH,
};
pub use kernels::{bessel_kernel, bessel_power_fit, heat_green, heat_green_decaying, BesselFit};
pub use reports::{
    band, fit_rate, path_distance, write_checks_csv, Band, CheckRecord, CheckValue,
    ConvergenceReport,
};
