//! Pseudo-spectral simulation of the damped stochastic wave equation on the
//! 2-torus and its heat (stochastic quantization) limit, with the Wick and
//! imaginary multiplicative-chaos renormalizations and the measurement layer
//! used to observe the small-mass limit.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod noise;
pub mod propagators;
pub mod quadrature;
pub mod renorm;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{FrequencyLattice, SmoothCutoff, SpectralField};
