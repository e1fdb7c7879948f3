//! Integration of the renormalized remainder equations.
//!
//! The solution is split as `u = Psi + v` (polynomial model) or `w = Psi + z`
//! (sine-Gordon). `Psi` is simulated exactly by [`crate::noise`]. The
//! remainder lives on the modes `<n> < 2N` and is advanced by a first-order
//! exponential integrator: the nonlinearity is frozen over each step, the
//! linear flow is exact. Products are evaluated pointwise on an `M x M` grid
//! with `M >= (k + 1) 2N`, which makes them exact on the retained modes.

mod config;
mod enhanced;
mod picard;
mod remainder;
mod solve;

pub use config::{InitialData, Model, ModelConfig};
pub use enhanced::{build_enhanced_data, enhanced_snapshot, EnhancedData, EnhancedSnapshot};
pub use picard::{integrate_frozen, picard_solve_local, LocalProblem, PicardOutcome};
pub use remainder::{step_remainder, Remainder};
pub use solve::{ledger_for, solve_model, solve_model_with, Trajectory};

/// Coefficients above this magnitude count as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;
