//! Torus grid, Fourier transforms, projections, Sobolev norms and products.

mod cutoff;
mod fft;
mod field;
pub mod io;
mod lattice;

pub use cutoff::SmoothCutoff;
pub use field::{dealiased_product, dft_roundtrip, Side, SpectralField};
pub use lattice::{bracket, bracket_sq, FrequencyLattice};
