use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reports::{band, Band};
use crate::error::{Error, Result};
use crate::renorm::mode_variance;
use crate::spectral::SmoothCutoff;

/// Default admissible width of an additive band.
pub const DEFAULT_BAND_WIDTH: f64 = 3.0;

/// Euclidean length of the representative of `x` in `[-pi, pi)^2`.
pub fn torus_norm(x: (f64, f64)) -> f64 {
    let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
    wrap(x.0).hypot(wrap(x.1))
}

/// `sum_n w(n) cos(n . x)` over `n` in a disc, with per-mode weights fixed
/// at construction.
#[derive(Clone, Debug)]
pub struct CovarianceKernel {
    /// Canonical modes with weights already doubled for `n != 0`.
    terms: Vec<(f64, f64, f64)>,
}

impl CovarianceKernel {
    /// Modes with `<n> < radius_bracket`, weight `w(<n>^2)` shared by `n` and `-n`.
    pub fn from_weights(radius_bracket: f64, weight: impl Fn(f64) -> f64 + Sync) -> Self {
        let r = radius_bracket.ceil() as i64;
        let mut terms = Vec::new();
        for n2 in 0..=r {
            for n1 in -r..=r {
                if n2 == 0 && n1 < 0 {
                    continue;
                }
                let k2 = (1 + n1 * n1 + n2 * n2) as f64;
                if k2 >= radius_bracket * radius_bracket {
                    continue;
                }
                let w = weight(k2);
                if w != 0.0 {
                    let mult = if (n1, n2) == (0, 0) { 1.0 } else { 2.0 };
                    terms.push((n1 as f64, n2 as f64, mult * w));
                }
            }
        }
        Self { terms }
    }

    /// `Gamma_{eps,N}(t, .)` with the projection weight `chi_N^2`.
    pub fn gamma(eps: f64, cutoff: f64, t: f64) -> Result<Self> {
        let chi = SmoothCutoff;
        Self::projected(eps, t, 2.0 * cutoff, move |k2| {
            chi.weight(k2, cutoff).powi(2)
        })
    }

    /// `sum_n p(n) (2 pi)^{-2} int_0^t kappa_eps^2 cos(n . x)` for a projection
    /// symbol `p` supported in `<n> < radius_bracket`.
    pub fn projected(
        eps: f64,
        t: f64,
        radius_bracket: f64,
        p: impl Fn(f64) -> f64 + Sync,
    ) -> Result<Self> {
        if !(t >= 0.0) || !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need t, eps >= 0 (t = {t}, eps = {eps})"
            )));
        }
        let r = radius_bracket.ceil() as u64;
        let nsqs: Vec<u64> = (0..=2 * r * r)
            .filter(|&q| ((1 + q) as f64) < radius_bracket.powi(2))
            .collect();
        let var: Vec<f64> = nsqs
            .par_iter()
            .map(|&q| {
                let k2 = 1.0 + q as f64;
                if p(k2) == 0.0 {
                    Ok(0.0)
                } else {
                    mode_variance(eps, k2, 0.0, t)
                }
            })
            .collect::<Result<_>>()?;
        let norm = (2.0 * PI).powi(-2);
        Ok(Self::from_weights(radius_bracket, |k2| {
            let q = (k2 - 1.0).round() as usize;
            norm * p(k2) * var[q]
        }))
    }

    pub fn eval(&self, x: (f64, f64)) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, w)| w * (a * x.0 + b * x.1).cos())
            .sum()
    }
}

/// `Gamma_{eps,N}(t, x) = E[Psi_{eps,N}(t, x) Psi_{eps,N}(t, 0)]`.
pub fn covariance_gamma(eps: f64, cutoff: f64, t: f64, x: (f64, f64)) -> Result<f64> {
    Ok(CovarianceKernel::gamma(eps, cutoff, t)?.eval(x))
}

/// Potential `J_{eps,N}(t, x)` in `(0, 1]`; the heat form at `eps = 0` or `N <= 1/(2 eps)`.
pub fn potential_j(eps: f64, cutoff: f64, t: f64, x: (f64, f64)) -> f64 {
    let r = torus_norm(x);
    let inv = 1.0 / cutoff;
    let st = t.sqrt();
    if eps == 0.0 || cutoff <= 0.5 / eps {
        (r + inv) / (r + st + inv)
    } else {
        let expo = -(-t / (eps * eps)).exp_m1();
        (r + eps) / (r + st + eps) * ((r + inv) / (r + eps)).powf(expo)
    }
}

/// Probe points `(t, x)`: `x` on `radii` along `directions` (angles), at each time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub radii: Vec<f64>,
    pub directions: Vec<f64>,
    pub times: Vec<f64>,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            radii: (0..=5).map(|j| PI / f64::powi(2.0, j)).collect(),
            directions: vec![0.0, PI / 6.0, PI / 4.0],
            times: vec![0.01, 0.1, 1.0],
        }
    }
}

impl ProbeGrid {
    /// A finer grid containing this one: midpoint radii and extra directions.
    pub fn refined(&self) -> Self {
        let mut radii = self.radii.clone();
        for w in self.radii.windows(2) {
            radii.push((w[0] * w[1]).sqrt());
        }
        if let Some(&last) = self.radii.last() {
            radii.push(last / 2.0);
        }
        let mut directions = self.directions.clone();
        directions.extend([PI / 12.0, PI / 3.0]);
        Self {
            radii,
            directions,
            times: self.times.clone(),
        }
    }

    pub fn points(&self) -> Vec<(f64, (f64, f64))> {
        let mut out = Vec::new();
        for &t in &self.times {
            for &r in &self.radii {
                for &a in &self.directions {
                    out.push((t, (r * a.cos(), r * a.sin())));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub eps: f64,
    pub cutoff: f64,
    pub probes: Vec<(f64, (f64, f64))>,
    pub gamma: Vec<f64>,
    /// `-(1/4 pi) log J_{eps,N}` at each probe.
    pub prediction: Vec<f64>,
    pub band: Band,
}

/// Band of `Gamma_{eps,N} - (-(1/4 pi) log J_{eps,N})` over the probes.
pub fn covariance_band(
    eps: f64,
    cutoff: f64,
    grid: &ProbeGrid,
    width: f64,
) -> Result<CovarianceReport> {
    let probes = grid.points();
    let mut gamma = Vec::with_capacity(probes.len());
    for &t in &grid.times {
        let k = CovarianceKernel::gamma(eps, cutoff, t)?;
        gamma.extend(probes.iter().filter(|p| p.0 == t).map(|p| k.eval(p.1)));
    }
    let prediction: Vec<f64> = probes
        .iter()
        .map(|&(t, x)| -potential_j(eps, cutoff, t, x).ln() / (4.0 * PI))
        .collect();
    let band = band(&prediction, &gamma, width);
    Ok(CovarianceReport {
        eps,
        cutoff,
        probes,
        gamma,
        prediction,
        band,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DifferenceReport {
    pub eps: f64,
    pub n1: f64,
    pub n2: f64,
    pub delta: f64,
    /// `max |P_{N_j}^2 Gamma - P_{N1} P_{N2} Gamma| N1^delta |x|^{2 delta}` over probes and `j = 1, 2`.
    pub constant: f64,
    pub probes: usize,
}

/// Certificate constant for the difference of projected covariances.
pub fn cov_difference_check(
    n1: f64,
    n2: f64,
    eps: f64,
    grid: &ProbeGrid,
    delta: f64,
) -> Result<DifferenceReport> {
    if !(n1 >= 8.0) || n2 < n1 {
        return Err(Error::InvalidArgument(format!(
            "need 8 <= N1 <= N2 (N1 = {n1}, N2 = {n2})"
        )));
    }
    let chi = SmoothCutoff;
    let probes = grid.points();
    let mut constant = 0.0f64;
    for &t in &grid.times {
        let k1 = CovarianceKernel::gamma(eps, n1, t)?;
        let k2 = CovarianceKernel::gamma(eps, n2, t)?;
        let mixed = CovarianceKernel::projected(eps, t, 2.0 * n1, |q| {
            chi.weight(q, n1) * chi.weight(q, n2)
        })?;
        for &(_, x) in probes.iter().filter(|p| p.0 == t) {
            let m = mixed.eval(x);
            let d = (k1.eval(x) - m).abs().max((k2.eval(x) - m).abs());
            constant = constant.max(d * n1.powf(delta) * torus_norm(x).powf(2.0 * delta));
        }
    }
    Ok(DifferenceReport {
        eps,
        n1,
        n2,
        delta,
        constant,
        probes: probes.len(),
    })
}
