//! Seeded cylindrical Wiener increments and exact Gaussian stepping of the
//! truncated stochastic convolutions.
//!
//! All randomness is addressed by `(seed, n, j)`, so the same increments drive
//! every damping parameter, every cutoff and every lattice size. Each state's
//! one-step fluctuation is decomposed as its regression on the Brownian
//! increment plus an independent residual; both parts use innovations shared
//! by all states. This keeps the transition law exact for every `eps` while
//! coupling the family pathwise to the same white noise.

mod path;
mod state;
mod transition;

pub use path::{canonical_mode, sample_path, write_path_csv, Innovations, NoisePath};
pub use state::{
    advance_convolutions, sigma_from_state_mc, ConvolutionState, McEstimate, SupportModes,
};
pub(crate) use transition::fast_scale;
pub use transition::{coefficient_table, step_coeffs, transition_cov, StepCoeffs};
