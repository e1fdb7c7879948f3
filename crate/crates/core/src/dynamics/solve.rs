use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::ModelConfig;
use super::enhanced::enhanced_snapshot;
use super::remainder::Remainder;
use crate::error::{Error, Result};
use crate::noise::{advance_convolutions, sample_path, ConvolutionState, SupportModes};
use crate::renorm::WickLedger;
use crate::spectral::{FrequencyLattice, SpectralField};

/// Recorded states of one member of the `eps` family.
///
/// Fields are stored on the smallest lattice holding `<n> < 2N`, which is lossless.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub eps: f64,
    pub cutoff: f64,
    pub times: Vec<f64>,
    pub steps: Vec<usize>,
    pub psi: Vec<SpectralField>,
    pub v: Vec<SpectralField>,
    /// `u = Psi + v`
    pub u: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(eps: f64, cutoff: f64) -> Self {
        Self {
            eps,
            cutoff,
            times: Vec::new(),
            steps: Vec::new(),
            psi: Vec::new(),
            v: Vec::new(),
            u: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        step: usize,
        t: f64,
        psi: SpectralField,
        v: SpectralField,
    ) -> Result<()> {
        let u = psi.add(&v)?;
        self.steps.push(step);
        self.times.push(t);
        self.psi.push(psi);
        self.v.push(v);
        self.u.push(u);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_j max_n |u_j - Psi_j - v_j|`, relative to the coefficient size.
    pub fn assembly_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((u, p), v) in self.u.iter().zip(&self.psi).zip(&self.v) {
            for ((a, b), c) in u.coeffs().iter().zip(p.coeffs()).zip(v.coeffs()) {
                let scale = b.norm().max(c.norm()).max(1e-300);
                worst = worst.max((a - b - c).norm() / scale);
            }
        }
        worst
    }

    /// CSV rows `eps,t,u_hm1_4,v_h1_2`.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> Result<()> {
        if header {
            writeln!(w, "eps,t,u_hm1_4,v_h1_2")?;
        }
        for j in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.eps,
                self.times[j],
                self.u[j].sobolev_norm(-0.25),
                self.v[j].sobolev_norm(0.5)
            )?;
        }
        Ok(())
    }
}

/// Ledger covering every step time of `config`.
pub fn ledger_for(config: &ModelConfig) -> Result<WickLedger> {
    let path = sample_path(config.seed, config.grid()?, config.horizon, config.steps)?;
    let times: Vec<f64> = (0..=config.steps).map(|j| path.time(j)).collect();
    WickLedger::build(
        config.model.beta().unwrap_or(0.0),
        &config.eps,
        &[config.cutoff],
        &times,
    )
}

/// Simulates every `eps` of the family on one noise path.
pub fn solve_model(config: &ModelConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    solve_model_with(config, &ledger_for(config)?)
}

/// As [`solve_model`] with a prebuilt ledger (shared across seeds).
pub fn solve_model_with(config: &ModelConfig, ledger: &WickLedger) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let grid = config.grid()?;
    let path = sample_path(config.seed, grid, config.horizon, config.steps)?;
    let modes = Arc::new(SupportModes::new(config.cutoff)?);
    let store = FrequencyLattice::covering(modes.radius());
    let initial = config.initial.to_pair(grid)?;
    let mut psi: Vec<ConvolutionState> = config
        .eps
        .iter()
        .map(|&e| ConvolutionState::with_modes(e, modes.clone(), &path))
        .collect::<Result<_>>()?;
    let mut rem: Vec<Remainder> = config
        .eps
        .iter()
        .map(|&e| Remainder::new(e, modes.clone(), grid, path.dt(), &initial))
        .collect::<Result<_>>()?;
    let mut traj: Vec<Trajectory> = config
        .eps
        .iter()
        .map(|&e| Trajectory::new(e, config.cutoff))
        .collect();
    let k = config.steps;
    for j in 0..=k {
        let t = path.time(j);
        let keep = j % config.record_every == 0 || j == k;
        psi.par_iter()
            .zip(rem.par_iter_mut())
            .zip(traj.par_iter_mut())
            .map(|((p, r), tr)| -> Result<()> {
                if keep {
                    tr.record(j, t, p.field(store)?, r.field(store)?)?;
                }
                if j < k {
                    let sigma = ledger.sigma(p.eps(), config.cutoff, t)?;
                    let snap = enhanced_snapshot(config.model, &p.field(grid)?, t, sigma, grid)?;
                    r.step(&snap).map_err(|e| match e {
                        Error::BlowUp { eps, step, .. } => Error::BlowUp {
                            eps,
                            step,
                            t: path.time(step),
                        },
                        other => other,
                    })?;
                }
                Ok(())
            })
            .collect::<Result<Vec<()>>>()?;
        if j < k {
            advance_convolutions(&mut psi, &path, j)?;
        }
    }
    Ok(traj)
}
