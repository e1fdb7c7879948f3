use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::{sample_path, Innovations, NoisePath};
use super::transition::{coefficient_table, StepCoeffs};
use crate::error::{Error, Result};
use crate::spectral::{FrequencyLattice, SmoothCutoff, SpectralField};

/// Canonical (upper half-plane) modes with `chi_N(n) > 0`, i.e. `<n> < 2N`.
#[derive(Clone, Debug)]
pub struct SupportModes {
    cutoff: f64,
    modes: Vec<(i64, i64)>,
    /// Index into `nsqs` for each mode.
    class: Vec<u32>,
    /// Distinct values of `|n|^2`.
    nsqs: Vec<u64>,
    radius: usize,
}

impl SupportModes {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff must be >= 1, got {cutoff}"
            )));
        }
        let chi = SmoothCutoff;
        let radius = chi.support_radius(cutoff) as i64;
        let mut modes = Vec::new();
        for n2 in 0..=radius {
            for n1 in -radius..=radius {
                if n2 == 0 && n1 < 0 {
                    continue;
                }
                if chi.in_support((1 + n1 * n1 + n2 * n2) as f64, cutoff) {
                    modes.push((n1, n2));
                }
            }
        }
        let mut nsqs: Vec<u64> = modes.iter().map(|&(a, b)| (a * a + b * b) as u64).collect();
        nsqs.sort_unstable();
        nsqs.dedup();
        let class = modes
            .iter()
            .map(|&(a, b)| nsqs.binary_search(&((a * a + b * b) as u64)).unwrap() as u32)
            .collect();
        Ok(Self {
            cutoff,
            modes,
            class,
            nsqs,
            radius: radius as usize,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn modes(&self) -> &[(i64, i64)] {
        &self.modes
    }

    pub fn nsqs(&self) -> &[u64] {
        &self.nsqs
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `|n_j|` among the modes.
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Index into [`SupportModes::nsqs`] of mode `i`.
    pub fn class(&self, i: usize) -> usize {
        self.class[i] as usize
    }

    /// Real field with the given canonical coefficients (conjugates filled in).
    pub fn scatter(
        &self,
        values: &[Complex64],
        lattice: FrequencyLattice,
    ) -> Result<SpectralField> {
        self.scatter_weighted(values, lattice, |_| 1.0)
    }

    pub(crate) fn scatter_weighted(
        &self,
        values: &[Complex64],
        lattice: FrequencyLattice,
        weight: impl Fn(f64) -> f64,
    ) -> Result<SpectralField> {
        let mut out = SpectralField::zeros(lattice, true);
        let coeffs = out.coeffs_mut();
        // Only modes with non-zero weight need to fit on the lattice.
        for (&(n1, n2), v) in self.modes.iter().zip(values) {
            let w = weight((1 + n1 * n1 + n2 * n2) as f64);
            if w == 0.0 {
                continue;
            }
            let (Some(i), Some(j)) = (lattice.index(n1, n2), lattice.index(-n1, -n2)) else {
                return Err(Error::ModeOutsideLattice(n1, n2));
            };
            if lattice.is_nyquist(n1, n2) {
                return Err(Error::ModeOutsideLattice(n1, n2));
            }
            let z = v * w;
            coeffs[i] = z;
            coeffs[j] = z.conj();
        }
        Ok(out)
    }

    /// Canonical coefficients of `field` on these modes (the sharp projection).
    pub fn gather(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        if 2 * self.radius >= field.lattice().size() {
            return Err(Error::ModeOutsideLattice(self.radius as i64, 0));
        }
        Ok(self.modes.iter().map(|&n| field.get(n)).collect())
    }
}

/// Stochastic convolution `Psi_eps` restricted to `<n> < 2N`, started from zero.
///
/// Coefficients are stored without the cutoff weight; [`ConvolutionState::field`]
/// applies `chi_N`. Only canonical modes are kept, the rest follow by symmetry.
#[derive(Clone, Debug)]
pub struct ConvolutionState {
    eps: f64,
    modes: Arc<SupportModes>,
    coeffs: Vec<StepCoeffs>,
    h: f64,
    step: usize,
    time: f64,
    psi: Vec<Complex64>,
    dpsi: Vec<Complex64>,
}

impl ConvolutionState {
    pub fn new(eps: f64, cutoff: f64, path: &NoisePath) -> Result<Self> {
        Self::with_modes(eps, Arc::new(SupportModes::new(cutoff)?), path)
    }

    pub fn with_modes(eps: f64, modes: Arc<SupportModes>, path: &NoisePath) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps must be non-negative, got {eps}"
            )));
        }
        let lat = path.lattice();
        if 2 * modes.radius() >= lat.size() {
            return Err(Error::ModeOutsideLattice(modes.radius() as i64, 0));
        }
        let h = path.dt();
        let table = coefficient_table(eps, h, modes.nsqs())?;
        let coeffs = modes.nsqs().iter().map(|q| table[q]).collect();
        let n = modes.len();
        Ok(Self {
            eps,
            modes,
            coeffs,
            h,
            step: 0,
            time: 0.0,
            psi: vec![Complex64::default(); n],
            dpsi: vec![Complex64::default(); n],
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cutoff(&self) -> f64 {
        self.modes.cutoff()
    }

    pub fn modes(&self) -> &Arc<SupportModes> {
        &self.modes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Unweighted coefficient `Psi^(n)` for any `n` in the support.
    pub fn mode(&self, n: (i64, i64)) -> Complex64 {
        let (c, flipped) = super::path::canonical_mode(n);
        match self.modes.modes.iter().position(|&m| m == c) {
            Some(i) if flipped => self.psi[i].conj(),
            Some(i) => self.psi[i],
            None => Complex64::default(),
        }
    }

    /// Canonical coefficients in the order of [`SupportModes::modes`].
    pub fn coefficients(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn derivative_coefficients(&self) -> &[Complex64] {
        &self.dpsi
    }

    fn place(
        &self,
        lattice: FrequencyLattice,
        cutoff: f64,
        values: &[Complex64],
    ) -> Result<SpectralField> {
        if cutoff > self.cutoff() {
            return Err(Error::InvalidArgument(format!(
                "cannot read cutoff {cutoff} from a state truncated at {}",
                self.cutoff()
            )));
        }
        let chi = SmoothCutoff;
        self.modes
            .scatter_weighted(values, lattice, |k2| chi.weight(k2, cutoff))
    }

    /// `Psi_{eps,N} = chi_N Psi_eps` on `lattice`.
    pub fn field(&self, lattice: FrequencyLattice) -> Result<SpectralField> {
        self.place(lattice, self.cutoff(), &self.psi)
    }

    /// `chi_{N'} Psi_eps` for a smaller cutoff `N' <= N`; shares the noise of `self`.
    pub fn field_with_cutoff(
        &self,
        lattice: FrequencyLattice,
        cutoff: f64,
    ) -> Result<SpectralField> {
        self.place(lattice, cutoff, &self.psi)
    }

    /// `chi_N d/dt Psi_eps`; zero at `eps = 0`.
    pub fn derivative_field(&self, lattice: FrequencyLattice) -> Result<SpectralField> {
        self.place(lattice, self.cutoff(), &self.dpsi)
    }

    /// Point value `Psi_{eps,N}(x)`.
    pub fn value_at(&self, x: (f64, f64)) -> f64 {
        let chi = SmoothCutoff;
        let mut acc = 0.0;
        for (&(n1, n2), v) in self.modes.modes.iter().zip(&self.psi) {
            let w = chi.weight((1 + n1 * n1 + n2 * n2) as f64, self.cutoff());
            let phase = Complex64::from_polar(1.0, n1 as f64 * x.0 + n2 as f64 * x.1);
            let term = w * (v * phase).re;
            acc += if (n1, n2) == (0, 0) { term } else { 2.0 * term };
        }
        acc / std::f64::consts::TAU
    }

    fn apply(&mut self, z: &[Innovations]) {
        let zero_mode = self.modes.modes.first() == Some(&(0, 0));
        let heat = self.eps == 0.0;
        for (i, zi) in z.iter().enumerate() {
            let c = &self.coeffs[self.modes.class[i] as usize];
            let s = if zero_mode && i == 0 {
                1.0
            } else {
                std::f64::consts::FRAC_1_SQRT_2
            };
            let (p, dp) = (self.psi[i], self.dpsi[i]);
            let n0 = (zi[0] * c.b[0] + zi[1] * c.l[0][0]) * s;
            if heat {
                self.psi[i] = p * c.m[0][0] + n0;
            } else {
                let n1 = (zi[0] * c.b[1] + zi[1] * c.l[1][0] + zi[2] * c.l[1][1]) * s;
                self.psi[i] = p * c.m[0][0] + dp * c.m[0][1] + n0;
                self.dpsi[i] = p * c.m[1][0] + dp * c.m[1][1] + n1;
            }
        }
    }
}

/// Advances every state from `t_j` to `t_{j+1}` with the same innovations.
pub fn advance_convolutions(
    states: &mut [ConvolutionState],
    path: &NoisePath,
    j: usize,
) -> Result<()> {
    let Some(first) = states.first() else {
        return Ok(());
    };
    let modes = first.modes.clone();
    for s in states.iter() {
        if s.step != j {
            return Err(Error::TimeMismatch {
                state: s.time,
                path: path.time(j),
            });
        }
        if (s.h - path.dt()).abs() > 1e-15 * s.h {
            return Err(Error::InvalidArgument(format!(
                "state step {} differs from path step {}",
                s.h,
                path.dt()
            )));
        }
        if s.modes.cutoff() != modes.cutoff() {
            return Err(Error::InvalidArgument(
                "states must share one cutoff".into(),
            ));
        }
    }
    if j >= path.steps() {
        return Err(Error::InvalidArgument(format!(
            "step {j} beyond K = {}",
            path.steps()
        )));
    }
    let z: Vec<Innovations> = modes
        .modes
        .par_iter()
        .map(|&n| path.innovations(n, j))
        .collect();
    states.par_iter_mut().for_each(|s| {
        s.apply(&z);
        s.step += 1;
        s.time = path.time(s.step);
    });
    Ok(())
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
            samples: xs.len(),
        }
    }

    /// `|mean - target| <= k * stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Monte Carlo estimate of `E[Psi_{eps,N}(0, t)^2]` from `paths` independent
/// exact one-step simulations with seeds `base_seed..base_seed + paths`.
pub fn sigma_from_state_mc(
    eps: f64,
    cutoff: f64,
    t: f64,
    paths: usize,
    base_seed: u64,
) -> Result<McEstimate> {
    if paths < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 paths, got {paths}"
        )));
    }
    if t == 0.0 {
        return Ok(McEstimate {
            mean: 0.0,
            stderr: 0.0,
            samples: paths,
        });
    }
    let modes = Arc::new(SupportModes::new(cutoff)?);
    let lattice = FrequencyLattice::covering(modes.radius());
    let samples: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(base_seed.wrapping_add(i), lattice, t, 1)?;
            let mut st = [ConvolutionState::with_modes(eps, modes.clone(), &path)?];
            advance_convolutions(&mut st, &path, 0)?;
            Ok(st[0].value_at((0.0, 0.0)).powi(2))
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_modes_counts() {
        let m = SupportModes::new(4.0).unwrap();
        // <n> < 8: |n|^2 <= 62
        let full = (-8i64..=8)
            .flat_map(|a| (-8i64..=8).map(move |b| (a, b)))
            .filter(|&(a, b)| a * a + b * b <= 62)
            .count();
        assert_eq!(2 * m.len() - 1, full);
        assert_eq!(m.radius(), 7);
        assert_eq!(m.modes()[0], (0, 0));
    }

    #[test]
    fn identical_eps_gives_identical_paths() {
        let path = sample_path(5, FrequencyLattice::new(32).unwrap(), 1.0, 8).unwrap();
        let mut st = vec![
            ConvolutionState::new(0.2, 4.0, &path).unwrap(),
            ConvolutionState::new(0.2, 4.0, &path).unwrap(),
        ];
        for j in 0..8 {
            advance_convolutions(&mut st, &path, j).unwrap();
        }
        assert_eq!(st[0].coefficients(), st[1].coefficients());
        assert!((st[0].time() - 1.0).abs() < 1e-15);
        assert!(advance_convolutions(&mut st, &path, 3).is_err());
    }

    #[test]
    fn field_is_real_and_weighted() {
        let lat = FrequencyLattice::new(32).unwrap();
        let path = sample_path(2, lat, 0.5, 1).unwrap();
        let mut st = [ConvolutionState::new(0.0, 4.0, &path).unwrap()];
        advance_convolutions(&mut st, &path, 0).unwrap();
        let f = st[0].field(lat).unwrap();
        assert!(f.hermitian_defect() < 1e-15);
        let vals = f.to_physical_real().unwrap();
        assert!((vals[0] - st[0].value_at((0.0, 0.0))).abs() < 1e-12);
        let g = st[0].field_with_cutoff(lat, 2.0).unwrap();
        assert_eq!(g.get((5, 0)), Complex64::default());
        assert!(st[0].field_with_cutoff(lat, 5.0).is_err());
        assert!(st[0].field(FrequencyLattice::new(8).unwrap()).is_err());
    }
}
