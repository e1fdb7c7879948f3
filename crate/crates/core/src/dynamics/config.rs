use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::InitialDataPair;
use crate::spectral::{FrequencyLattice, SpectralField};

/// Nonlinearity of the remainder equation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    /// `:u^k:`
    Polynomial { k: usize },
    /// `gamma sin(beta u)`
    SineGordon { beta: f64 },
}

impl Model {
    pub fn degree(&self) -> Option<usize> {
        match self {
            Model::Polynomial { k } => Some(*k),
            Model::SineGordon { .. } => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            Model::SineGordon { beta } => Some(*beta),
            Model::Polynomial { .. } => None,
        }
    }
}

/// Finitely many Fourier modes `(n1, n2, re, im)` of `phi0` and `phi1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    #[default]
    Zero,
    Modes {
        #[serde(default)]
        phi0: Vec<(i64, i64, f64, f64)>,
        #[serde(default)]
        phi1: Vec<(i64, i64, f64, f64)>,
    },
}

impl InitialData {
    pub fn to_pair(&self, lattice: FrequencyLattice) -> Result<InitialDataPair> {
        match self {
            InitialData::Zero => Ok(InitialDataPair::zero(lattice)),
            InitialData::Modes { phi0, phi1 } => {
                let build = |list: &[(i64, i64, f64, f64)]| -> Result<SpectralField> {
                    let mut f = SpectralField::zeros(lattice, true);
                    for &(n1, n2, re, im) in list {
                        if lattice.index(n1, n2).is_none() || lattice.is_nyquist(n1, n2) {
                            return Err(Error::ModeOutsideLattice(n1, n2));
                        }
                        let im = if (n1, n2) == (0, 0) { 0.0 } else { im };
                        f.set((n1, n2), Complex64::new(re, im))?;
                    }
                    Ok(f)
                };
                InitialDataPair::new(build(phi0)?, build(phi1)?)
            }
        }
    }
}

fn default_record_every() -> usize {
    1
}

/// One simulation: an `eps` family sharing one noise path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub model: Model,
    pub eps: Vec<f64>,
    /// Cutoff `N`.
    pub cutoff: f64,
    /// Grid size `M`.
    pub lattice: usize,
    pub horizon: f64,
    pub steps: usize,
    #[serde(default)]
    pub initial: InitialData,
    pub seed: u64,
    /// Keep every `record_every`-th step (the final step is always kept).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl ModelConfig {
    /// Checks hard constraints and returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let mut warnings = Vec::new();
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return bad(format!(
                "eps list must be non-empty and non-negative: {:?}",
                self.eps
            ));
        }
        if !(self.cutoff >= 1.0) {
            return bad(format!("cutoff N must be >= 1, got {}", self.cutoff));
        }
        if !(self.horizon > 0.0) || self.steps == 0 || self.record_every == 0 {
            return bad("need T > 0, K >= 1 and record_every >= 1".into());
        }
        FrequencyLattice::new(self.lattice)?;
        let two_n = 2.0 * self.cutoff;
        match self.model {
            Model::Polynomial { k } => {
                if k < 2 {
                    return bad(format!("polynomial degree must be >= 2, got {k}"));
                }
                if (self.lattice as f64) < (k + 1) as f64 * two_n {
                    return bad(format!(
                        "M = {} is below (k + 1) 2N = {} needed for exact degree-{k} products",
                        self.lattice,
                        (k + 1) as f64 * two_n
                    ));
                }
                if k % 2 == 0 {
                    warnings.push(format!(
                        "even degree k = {k}: solutions may blow up in finite time"
                    ));
                }
                warnings.push(format!(
                    "initial data should lie in H^s with s > {:.4}; finite-mode data is smooth",
                    (2.0 * k as f64 - 3.0) / (2.0 * k as f64 - 2.0)
                ));
            }
            Model::SineGordon { beta } => {
                let b2 = beta * beta;
                let four_pi = 4.0 * std::f64::consts::PI;
                if !(beta > 0.0) || b2 >= four_pi {
                    return bad(format!(
                        "sine-Gordon needs 0 < beta^2 < 4 pi, got beta^2 = {b2}"
                    ));
                }
                if b2 > 0.5 * four_pi {
                    warnings.push(format!(
                        "beta^2 = {b2:.4} exceeds 2 pi; outside the validated regime"
                    ));
                }
                if (self.lattice as f64) < 2.0 * two_n {
                    return bad(format!(
                        "M = {} must be at least 4N = {}",
                        self.lattice,
                        2.0 * two_n
                    ));
                }
                warnings.push(format!(
                    "initial data should lie in H^s with s > {:.4}; finite-mode data is smooth",
                    1.0 - b2 / four_pi
                ));
            }
        }
        Ok(warnings)
    }

    pub fn grid(&self) -> Result<FrequencyLattice> {
        FrequencyLattice::new(self.lattice)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}
