use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::Model;
use super::enhanced::EnhancedSnapshot;
use super::remainder::{forcing, Remainder};
use super::solve::Trajectory;
use crate::error::{Error, Result};
use crate::noise::SupportModes;
use crate::propagators::{damped_pair, InitialDataPair};
use crate::spectral::{FrequencyLattice, SpectralField};

/// Iteration cap of the fixed-point solver.
pub const PICARD_MAX_ITERATIONS: usize = 50;

/// Deterministic remainder problem with time-independent enhanced data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProblem {
    pub model: Model,
    pub eps: f64,
    pub cutoff: f64,
    pub lattice: usize,
    pub horizon: f64,
    pub steps: usize,
}

impl LocalProblem {
    fn setup(&self) -> Result<(Arc<SupportModes>, FrequencyLattice, f64)> {
        if !(self.horizon > 0.0) || self.steps == 0 || !(self.eps >= 0.0) {
            return Err(Error::InvalidArgument(
                "need T > 0, K >= 1, eps >= 0".into(),
            ));
        }
        let grid = FrequencyLattice::new(self.lattice)?;
        let modes = Arc::new(SupportModes::new(self.cutoff)?);
        Ok((modes, grid, self.horizon / self.steps as f64))
    }

    fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.horizon
        } else {
            j as f64 * self.horizon / self.steps as f64
        }
    }
}

fn check_snapshot(
    problem: &LocalProblem,
    data: &EnhancedSnapshot,
    grid: FrequencyLattice,
) -> Result<()> {
    let ok = match (problem.model, data) {
        (Model::Polynomial { k }, EnhancedSnapshot::Polynomial { powers, .. }) => {
            powers.len() == k + 1
        }
        (Model::SineGordon { .. }, EnhancedSnapshot::SineGordon { .. }) => true,
        _ => false,
    };
    if !ok || data.grid_len() != grid.len() {
        return Err(Error::InvalidArgument(
            "enhanced snapshot does not match the problem".into(),
        ));
    }
    Ok(())
}

/// Exponential-integrator solution with the enhanced data frozen at `data`.
pub fn integrate_frozen(
    problem: &LocalProblem,
    data: &EnhancedSnapshot,
    initial: &InitialDataPair,
) -> Result<Trajectory> {
    let (modes, grid, h) = problem.setup()?;
    check_snapshot(problem, data, grid)?;
    let store = FrequencyLattice::covering(modes.radius());
    let mut rem = Remainder::new(problem.eps, modes, grid, h, initial)?;
    let mut traj = Trajectory::new(problem.eps, problem.cutoff);
    let zero = SpectralField::zeros(store, true);
    for j in 0..=problem.steps {
        traj.record(j, problem.time(j), zero.clone(), rem.field(store)?)?;
        if j < problem.steps {
            rem.step(data)?;
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// `sup_t ||v^{m+1} - v^m||_{H^{1/2}}` per iteration.
    pub increments: Vec<f64>,
}

fn sobolev(modes: &SupportModes, vals: &[Complex64], s: f64) -> f64 {
    modes
        .modes()
        .iter()
        .zip(vals)
        .map(|(&(a, b), v)| {
            let mult = if (a, b) == (0, 0) { 1.0 } else { 2.0 };
            mult * ((1 + a * a + b * b) as f64).powf(s) * v.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Fixed point of `v = P_eps(t)(phi0, phi1) + I_eps(G(v))`, with the Duhamel
/// integral `I_eps` evaluated by the trapezoid rule on the `K + 1` grid times.
/// Iterates until successive iterates differ by less than `tol` in
/// `sup_t H^{1/2}`.
pub fn picard_solve_local(
    problem: &LocalProblem,
    data: &EnhancedSnapshot,
    initial: &InitialDataPair,
    tol: f64,
) -> Result<PicardOutcome> {
    let (modes, grid, h) = problem.setup()?;
    check_snapshot(problem, data, grid)?;
    let k = problem.steps;
    let eps = problem.eps;
    let phi0 = modes.gather(&initial.phi0)?;
    let phi1 = modes.gather(&initial.phi1)?;
    let classes = modes.nsqs().len();
    // kernel[c][lag] = kappa(lag h), linear[c][j] = (combined, D) at t_j
    let mut kernel = vec![vec![0.0; k + 1]; classes];
    let mut linear = vec![vec![(0.0, 0.0); k + 1]; classes];
    for (c, &q) in modes.nsqs().iter().enumerate() {
        let k2 = 1.0 + q as f64;
        for j in 0..=k {
            let t = problem.time(j);
            if eps == 0.0 {
                let e = (-t * k2).exp();
                kernel[c][j] = e;
                linear[c][j] = (e, 0.0);
            } else {
                let (d, cc) = damped_pair(eps, k2, t);
                let s = 1.0 / (eps * eps);
                kernel[c][j] = s * d;
                linear[c][j] = (cc + 0.5 * s * d, d);
            }
        }
    }
    let lin: Vec<Vec<Complex64>> = (0..=k)
        .map(|j| {
            (0..modes.len())
                .map(|i| {
                    let (a, b) = linear[modes.class(i)][j];
                    phi0[i] * a + phi1[i] * b
                })
                .collect()
        })
        .collect();
    let mut v = lin.clone();
    let mut increments = Vec::new();
    for it in 1..=PICARD_MAX_ITERATIONS {
        let g: Vec<Vec<Complex64>> = v
            .iter()
            .map(|vj| {
                forcing(
                    &modes,
                    grid,
                    &modes.scatter(vj, grid)?.to_physical_real()?,
                    data,
                )
            })
            .collect::<Result<_>>()?;
        let mut inc = 0.0f64;
        let mut next = lin.clone();
        for j in 1..=k {
            for (i, out) in next[j].iter_mut().enumerate() {
                let ker = &kernel[modes.class(i)];
                let mut acc = (g[0][i] * ker[j] + g[j][i] * ker[0]) * 0.5;
                for l in 1..j {
                    acc += g[l][i] * ker[j - l];
                }
                *out += acc * h;
            }
            let diff: Vec<Complex64> = next[j].iter().zip(&v[j]).map(|(a, b)| a - b).collect();
            inc = inc.max(sobolev(&modes, &diff, 0.5));
        }
        v = next;
        increments.push(inc);
        if !inc.is_finite() || inc > super::BLOW_UP_THRESHOLD {
            break;
        }
        if inc < tol {
            let store = FrequencyLattice::covering(modes.radius());
            let zero = SpectralField::zeros(store, true);
            let mut trajectory = Trajectory::new(eps, problem.cutoff);
            for (j, vj) in v.iter().enumerate() {
                trajectory.record(j, problem.time(j), zero.clone(), modes.scatter(vj, store)?)?;
            }
            return Ok(PicardOutcome {
                trajectory,
                iterations: it,
                increments,
            });
        }
    }
    Err(Error::NonContraction {
        iterations: increments.len(),
        increment: increments.last().copied().unwrap_or(f64::NAN),
    })
}
