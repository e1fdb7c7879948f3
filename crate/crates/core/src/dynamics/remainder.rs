use std::sync::Arc;

use num_complex::Complex64;

use super::config::Model;
use super::enhanced::EnhancedSnapshot;
use super::BLOW_UP_THRESHOLD;
use crate::error::{Error, Result};
use crate::noise::{coefficient_table, SupportModes};
use crate::propagators::InitialDataPair;
use crate::spectral::{FrequencyLattice, SpectralField};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug)]
struct ModeStep {
    m: [[f64; 2]; 2],
    w: [f64; 2],
}

/// Remainder `v` (or `z`) and its time derivative on the canonical modes `<n> < 2N`.
#[derive(Clone, Debug)]
pub struct Remainder {
    eps: f64,
    h: f64,
    lattice: FrequencyLattice,
    modes: Arc<SupportModes>,
    steps: Vec<ModeStep>,
    v: Vec<Complex64>,
    dv: Vec<Complex64>,
    step: usize,
}

impl Remainder {
    /// Starts from the sharp projection of `initial`; `phi1` is ignored at `eps = 0`.
    pub fn new(
        eps: f64,
        modes: Arc<SupportModes>,
        lattice: FrequencyLattice,
        h: f64,
        initial: &InitialDataPair,
    ) -> Result<Self> {
        let table = coefficient_table(eps, h, modes.nsqs())?;
        let steps = modes
            .nsqs()
            .iter()
            .map(|q| {
                let c = table[q];
                ModeStep {
                    m: c.m,
                    w: c.duhamel(h),
                }
            })
            .collect();
        let v = modes.gather(&initial.phi0)?;
        let dv = if eps > 0.0 {
            modes.gather(&initial.phi1)?
        } else {
            vec![Complex64::default(); modes.len()]
        };
        Ok(Self {
            eps,
            h,
            lattice,
            modes,
            steps,
            v,
            dv,
            step: 0,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn modes(&self) -> &Arc<SupportModes> {
        &self.modes
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.v
    }

    /// `v` as a field on `lattice`.
    pub fn field(&self, lattice: FrequencyLattice) -> Result<SpectralField> {
        self.modes.scatter(&self.v, lattice)
    }

    pub fn derivative_field(&self, lattice: FrequencyLattice) -> Result<SpectralField> {
        self.modes.scatter(&self.dv, lattice)
    }

    /// Grid samples of `v` on the solver lattice.
    pub fn grid_values(&self) -> Result<Vec<f64>> {
        self.field(self.lattice)?.to_physical_real()
    }

    /// Pointwise forcing `G` on the solver grid: `-sum_l C(k,l) Xi_l v^{k-l}`
    /// or `-Im(e^{i beta z} Theta)`.
    pub fn nonlinearity_grid(&self, data: &EnhancedSnapshot) -> Result<Vec<f64>> {
        nonlinearity_grid(&self.grid_values()?, data)
    }

    /// Forcing projected onto the remainder's modes.
    pub fn forcing(&self, data: &EnhancedSnapshot) -> Result<Vec<Complex64>> {
        forcing(&self.modes, self.lattice, &self.grid_values()?, data)
    }

    /// One frozen-force exponential step.
    pub fn step(&mut self, data: &EnhancedSnapshot) -> Result<()> {
        let g = self.forcing(data)?;
        let heat = self.eps == 0.0;
        let mut worst = 0.0f64;
        for i in 0..self.v.len() {
            let s = &self.steps[self.modes.class(i)];
            let (v, dv) = (self.v[i], self.dv[i]);
            if heat {
                self.v[i] = v * s.m[0][0] + g[i] * s.w[0];
            } else {
                self.v[i] = v * s.m[0][0] + dv * s.m[0][1] + g[i] * s.w[0];
                self.dv[i] = v * s.m[1][0] + dv * s.m[1][1] + g[i] * s.w[1];
            }
            worst = worst.max(self.v[i].norm());
        }
        self.step += 1;
        if !worst.is_finite() || worst > BLOW_UP_THRESHOLD {
            return Err(Error::BlowUp {
                eps: self.eps,
                step: self.step,
                t: self.step as f64 * self.h,
            });
        }
        Ok(())
    }
}

pub(crate) fn nonlinearity_grid(v: &[f64], data: &EnhancedSnapshot) -> Result<Vec<f64>> {
    if v.len() != data.grid_len() {
        return Err(Error::InvalidArgument(format!(
            "enhanced data has {} grid points, remainder has {}",
            data.grid_len(),
            v.len()
        )));
    }
    Ok(match data {
        EnhancedSnapshot::Polynomial { powers, .. } => {
            let k = powers.len() - 1;
            let c: Vec<f64> = (0..=k).map(|p| binomial(k, p)).collect();
            v.iter()
                .enumerate()
                .map(|(x, &vx)| {
                    let mut acc = 0.0;
                    let mut vp = 1.0;
                    for p in 0..=k {
                        acc += c[p] * powers[k - p][x] * vp;
                        vp *= vx;
                    }
                    -acc
                })
                .collect()
        }
        EnhancedSnapshot::SineGordon { beta, theta, .. } => v
            .iter()
            .zip(theta)
            .map(|(&z, th)| -(Complex64::from_polar(1.0, beta * z) * th).im)
            .collect(),
    })
}

pub(crate) fn forcing(
    modes: &SupportModes,
    lattice: FrequencyLattice,
    v: &[f64],
    data: &EnhancedSnapshot,
) -> Result<Vec<Complex64>> {
    let g = nonlinearity_grid(v, data)?;
    modes.gather(&SpectralField::from_physical_real(lattice, &g)?)
}

/// Advances `state` by one step with the enhanced data at the start of the step.
pub fn step_remainder(state: &mut Remainder, model: Model, data: &EnhancedSnapshot) -> Result<()> {
    match (model, data) {
        (Model::Polynomial { k }, EnhancedSnapshot::Polynomial { powers, .. })
            if powers.len() == k + 1 => {}
        (Model::SineGordon { .. }, EnhancedSnapshot::SineGordon { .. }) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "enhanced data does not match the model".into(),
            ))
        }
    }
    state.step(data)
}
