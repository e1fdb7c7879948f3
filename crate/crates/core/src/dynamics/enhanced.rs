use num_complex::Complex64;

use super::config::Model;
use crate::error::{Error, Result};
use crate::renorm::{gamma_from_sigma, hermite, WickLedger};
use crate::spectral::{FrequencyLattice, SpectralField};

/// Renormalized stochastic inputs at one time, as samples on the solver grid.
#[derive(Clone, Debug)]
pub enum EnhancedSnapshot {
    /// `powers[l] = :Psi^l:` for `l = 0..=k` (normally `powers[0] = 1`).
    Polynomial { t: f64, powers: Vec<Vec<f64>> },
    /// `Theta = gamma e^{i beta Psi}`.
    SineGordon {
        t: f64,
        beta: f64,
        theta: Vec<Complex64>,
    },
}

impl EnhancedSnapshot {
    pub fn time(&self) -> f64 {
        match self {
            EnhancedSnapshot::Polynomial { t, .. } | EnhancedSnapshot::SineGordon { t, .. } => *t,
        }
    }

    /// All inputs identically zero, including the constant term: a linear problem.
    pub fn zero(model: Model, lattice: FrequencyLattice, t: f64) -> Self {
        let len = lattice.len();
        match model {
            Model::Polynomial { k } => EnhancedSnapshot::Polynomial {
                t,
                powers: vec![vec![0.0; len]; k + 1],
            },
            Model::SineGordon { beta } => EnhancedSnapshot::SineGordon {
                t,
                beta,
                theta: vec![Complex64::default(); len],
            },
        }
    }

    pub fn grid_len(&self) -> usize {
        match self {
            EnhancedSnapshot::Polynomial { powers, .. } => powers[0].len(),
            EnhancedSnapshot::SineGordon { theta, .. } => theta.len(),
        }
    }
}

/// Wick powers (or `Theta`) of `psi` sampled on `lattice`.
///
/// `psi` must fit on `lattice`; the samples are exact, aliasing only enters
/// later through products and is removed by the remainder's mode projection.
pub fn enhanced_snapshot(
    model: Model,
    psi: &SpectralField,
    t: f64,
    sigma: f64,
    lattice: FrequencyLattice,
) -> Result<EnhancedSnapshot> {
    if !psi.is_real() {
        return Err(Error::NotReal);
    }
    let x = psi.embed(&lattice)?.to_physical_real()?;
    Ok(match model {
        Model::Polynomial { k } => EnhancedSnapshot::Polynomial {
            t,
            powers: (0..=k)
                .map(|l| x.iter().map(|&v| hermite(l, v, sigma)).collect())
                .collect(),
        },
        Model::SineGordon { beta } => {
            let gamma = gamma_from_sigma(beta, sigma)?;
            EnhancedSnapshot::SineGordon {
                t,
                beta,
                theta: x
                    .iter()
                    .map(|&v| Complex64::from_polar(gamma, beta * v))
                    .collect(),
            }
        }
    })
}

/// Time-indexed enhanced data for one `(eps, N)`.
#[derive(Clone, Debug)]
pub struct EnhancedData {
    pub eps: f64,
    pub cutoff: f64,
    pub lattice: FrequencyLattice,
    pub snapshots: Vec<EnhancedSnapshot>,
}

/// Evaluates the enhanced data along a stored `Psi` trajectory, taking `sigma`
/// from the ledger (which must cover every time).
pub fn build_enhanced_data(
    model: Model,
    psi: &[SpectralField],
    times: &[f64],
    eps: f64,
    cutoff: f64,
    ledger: &WickLedger,
    lattice: FrequencyLattice,
) -> Result<EnhancedData> {
    if psi.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "{} fields but {} times",
            psi.len(),
            times.len()
        )));
    }
    if let Model::SineGordon { beta } = model {
        if (beta - ledger.beta()).abs() > 1e-15 * beta {
            return Err(Error::InvalidArgument(format!(
                "ledger built for beta = {}, model uses {beta}",
                ledger.beta()
            )));
        }
    }
    let snapshots = psi
        .iter()
        .zip(times)
        .map(|(f, &t)| enhanced_snapshot(model, f, t, ledger.sigma(eps, cutoff, t)?, lattice))
        .collect::<Result<_>>()?;
    Ok(EnhancedData {
        eps,
        cutoff,
        lattice,
        snapshots,
    })
}
