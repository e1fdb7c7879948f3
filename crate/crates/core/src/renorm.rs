//! Hermite polynomials, the variance `sigma_{eps,N}(t)` of the truncated
//! convolution, Wick powers and the imaginary multiplicative chaos
//! `Theta = gamma e^{i beta Psi}`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::fast_scale;
use crate::noise::McEstimate;
use crate::propagators::damped_pair;
use crate::quadrature::graded_integral;
use crate::spectral::{FrequencyLattice, SmoothCutoff, SpectralField};

/// Per-mode quadrature tolerance for `sigma`.
pub const SIGMA_TOL: f64 = 1e-10;

/// Largest admissible exponent `beta^2 sigma / 2`.
pub const GAMMA_EXPONENT_CAP: f64 = 700.0;

/// `H_l(x; sigma)`, from `H_{l+1} = x H_l - l sigma H_{l-1}`.
pub fn hermite(l: usize, x: f64, sigma: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for j in 1..l {
        let next = x * cur - j as f64 * sigma * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `H_k(x + y; sigma) - sum_l C(k, l) x^{k-l} H_l(y; sigma)`; zero up to rounding.
pub fn hermite_shift_check(k: usize, x: f64, y: f64, sigma: f64) -> f64 {
    let rhs: f64 = (0..=k)
        .map(|l| binomial(k, l) * x.powi((k - l) as i32) * hermite(l, y, sigma))
        .sum();
    hermite(k, x + y, sigma) - rhs
}

/// `|n|^2 -> #{n in Z^2 : <n> < 2N}` for the support of `chi_N`.
pub fn support_multiplicities(cutoff: f64) -> BTreeMap<u64, u64> {
    let chi = SmoothCutoff;
    let r = chi.support_radius(cutoff) as i64;
    let mut out = BTreeMap::new();
    for a in -r..=r {
        for b in -r..=r {
            let q = (a * a + b * b) as u64;
            if chi.in_support(1.0 + q as f64, cutoff) {
                *out.entry(q).or_insert(0) += 1;
            }
        }
    }
    out
}

fn kernel(eps: f64, k2: f64, s: f64) -> f64 {
    if eps == 0.0 {
        (-s * k2).exp()
    } else {
        damped_pair(eps, k2, s).0 / (eps * eps)
    }
}

/// `int_a^b kappa_eps(n, s)^2 ds` with `kappa_0 = e^{-s<n>^2}`, `kappa_eps = D/eps^2`.
pub fn mode_variance(eps: f64, k2: f64, a: f64, b: f64) -> Result<f64> {
    if eps == 0.0 {
        let f = |t: f64| -(-2.0 * t * k2).exp_m1() / (2.0 * k2);
        return Ok(f(b) - f(a));
    }
    let [v] = graded_integral(
        |s| [kernel(eps, k2, s).powi(2)],
        a,
        b,
        fast_scale(eps, k2),
        SIGMA_TOL,
    )?;
    Ok(v)
}

fn check_sigma_args(eps: f64, cutoff: f64) -> Result<()> {
    if !(eps >= 0.0) || !(cutoff >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma needs eps >= 0 and N >= 1 (eps = {eps}, N = {cutoff})"
        )));
    }
    Ok(())
}

/// `sigma_{eps,N}(t) = sum_n chi_N(n)^2 (2 pi)^{-2} int_0^t kappa_eps(n, s)^2 ds`.
pub fn sigma_variance(eps: f64, cutoff: f64, t: f64) -> Result<f64> {
    Ok(sigma_series(eps, cutoff, &[t])?[0])
}

/// `sigma_{eps,N}` on an ascending list of times.
pub fn sigma_series(eps: f64, cutoff: f64, times: &[f64]) -> Result<Vec<f64>> {
    check_sigma_args(eps, cutoff)?;
    if times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "times must be non-negative and ascending".into(),
        ));
    }
    let chi = SmoothCutoff;
    let mult: Vec<(u64, u64)> = support_multiplicities(cutoff).into_iter().collect();
    let per_mode: Vec<Vec<f64>> = mult
        .par_iter()
        .map(|&(q, count)| {
            let k2 = 1.0 + q as f64;
            let w = count as f64 * chi.weight(k2, cutoff).powi(2);
            let mut acc = 0.0;
            let mut prev = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                acc += mode_variance(eps, k2, prev, t)?;
                prev = t;
                out.push(w * acc);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let norm = (2.0 * std::f64::consts::PI).powi(-2);
    Ok((0..times.len())
        .map(|i| norm * per_mode.iter().map(|v| v[i]).sum::<f64>())
        .collect())
}

/// `e^{beta^2 sigma / 2}`, refusing exponents above 700.
/// Monte Carlo estimate of `E[H_2(f; sf) H_2(g; sg)]` for centred Gaussians
/// with variances `sf`, `sg` and covariance `rho`; the exact value is `2 rho^2`.
pub fn wick_orthogonality_mc(
    sf: f64,
    sg: f64,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if !(sf > 0.0) || !(sg > 0.0) || rho * rho > sf * sg || samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need a positive definite covariance and two samples (sf = {sf}, sg = {sg}, rho = {rho})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rho / sf.sqrt();
    let r = (sg - c * c).max(0.0).sqrt();
    let xs: Vec<f64> = (0..samples)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let f = sf.sqrt() * z1;
            let g = c * z1 + r * z2;
            hermite(2, f, sf) * hermite(2, g, sg)
        })
        .collect();
    Ok(McEstimate::from_samples(&xs))
}

pub fn gamma_from_sigma(beta: f64, sigma: f64) -> Result<f64> {
    let x = 0.5 * beta * beta * sigma;
    if x > GAMMA_EXPONENT_CAP {
        return Err(Error::GammaOverflow(x));
    }
    Ok(x.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub eps: f64,
    pub cutoff: f64,
    pub t: f64,
    pub sigma: f64,
}

/// Precomputed `sigma_{eps,N}(t)` with the chaos parameter `beta`; immutable
/// after [`WickLedger::build`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WickLedger {
    beta: f64,
    series: HashMap<(u64, u64), Vec<(f64, f64)>>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

impl WickLedger {
    pub fn build(beta: f64, eps: &[f64], cutoffs: &[f64], times: &[f64]) -> Result<Self> {
        let mut times = times.to_vec();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut series = HashMap::new();
        for &e in eps {
            for &n in cutoffs {
                let s = sigma_series(e, n, &times)?;
                series.insert(
                    (e.to_bits(), n.to_bits()),
                    times.iter().copied().zip(s).collect(),
                );
            }
        }
        Ok(Self { beta, series })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self, eps: f64, cutoff: f64, t: f64) -> Result<f64> {
        let miss = Error::LedgerMiss { eps, cutoff, t };
        let s = self
            .series
            .get(&(eps.to_bits(), cutoff.to_bits()))
            .ok_or(miss)?;
        let i = s.partition_point(|&(u, _)| u < t - 1e-12 * t.abs().max(1.0));
        match s.get(i) {
            Some(&(u, v)) if close(u, t) => Ok(v),
            _ => Err(Error::LedgerMiss { eps, cutoff, t }),
        }
    }

    pub fn gamma(&self, eps: f64, cutoff: f64, t: f64) -> Result<f64> {
        gamma_from_sigma(self.beta, self.sigma(eps, cutoff, t)?)
    }

    /// All entries sorted by `(eps, N, t)`.
    pub fn entries(&self) -> Vec<LedgerEntry> {
        let mut out: Vec<LedgerEntry> = self
            .series
            .iter()
            .flat_map(|(&(e, n), s)| {
                s.iter().map(move |&(t, sigma)| LedgerEntry {
                    eps: f64::from_bits(e),
                    cutoff: f64::from_bits(n),
                    t,
                    sigma,
                })
            })
            .collect();
        out.sort_by(|a, b| {
            a.eps
                .total_cmp(&b.eps)
                .then(a.cutoff.total_cmp(&b.cutoff))
                .then(a.t.total_cmp(&b.t))
        });
        out
    }

    /// CSV `eps,N,t,sigma,gamma`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "eps,N,t,sigma,gamma")?;
        for e in self.entries() {
            let g = gamma_from_sigma(self.beta, e.sigma)?;
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                e.eps, e.cutoff, e.t, e.sigma, g
            )?;
        }
        Ok(())
    }
}

/// `gamma_{eps,N}(t)` from the ledger.
pub fn gamma_renorm(ledger: &WickLedger, eps: f64, cutoff: f64, t: f64) -> Result<f64> {
    ledger.gamma(eps, cutoff, t)
}

/// `:Psi^l: = H_l(Psi; sigma)` with its grid values.
#[derive(Clone, Debug)]
pub struct WickPowerField {
    pub degree: usize,
    pub sigma: f64,
    /// Samples on the grid of `field.lattice()`.
    pub values: Vec<f64>,
    pub field: SpectralField,
}

/// Wick power on an automatically padded lattice large enough to be exact.
pub fn wick_power(psi: &SpectralField, l: usize, sigma: f64) -> Result<WickPowerField> {
    let need = FrequencyLattice::covering(l.max(1) * psi.support_radius());
    let lat = if need.size() > psi.lattice().size() {
        need
    } else {
        *psi.lattice()
    };
    wick_power_on(psi, l, sigma, lat)
}

/// Wick power evaluated on `lattice`; errors unless `l * r < M/2` for the
/// support radius `r` of `psi`, so that no frequency aliases.
pub fn wick_power_on(
    psi: &SpectralField,
    l: usize,
    sigma: f64,
    lattice: FrequencyLattice,
) -> Result<WickPowerField> {
    if !psi.is_real() {
        return Err(Error::NotReal);
    }
    let r = psi.support_radius();
    if l * r >= lattice.size() / 2 {
        return Err(Error::DealiasCapacity {
            degree: l,
            radius: r,
            m: lattice.size(),
        });
    }
    let x = psi.embed(&lattice)?.to_physical_real()?;
    let values: Vec<f64> = x.iter().map(|&v| hermite(l, v, sigma)).collect();
    let field = SpectralField::from_physical_real(lattice, &values)?;
    Ok(WickPowerField {
        degree: l,
        sigma,
        values,
        field,
    })
}

/// `Theta(x) = gamma e^{i beta Psi(x)}` on a physical grid.
#[derive(Clone, Debug)]
pub struct GmcField {
    pub beta: f64,
    pub gamma: f64,
    pub lattice: FrequencyLattice,
    pub values: Vec<Complex64>,
}

impl GmcField {
    /// Fourier coefficients of the grid samples.
    pub fn field(&self) -> Result<SpectralField> {
        SpectralField::from_physical(self.lattice, &self.values)
    }

    /// `max_x | |Theta(x)| - gamma |`.
    pub fn modulus_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v.norm() - self.gamma).abs())
            .fold(0.0, f64::max)
    }
}

pub fn gmc_theta(psi: &SpectralField, beta: f64, gamma: f64) -> Result<GmcField> {
    gmc_theta_on(psi, beta, gamma, *psi.lattice())
}

/// `Theta` sampled on `lattice`, which must contain the support of `psi`.
pub fn gmc_theta_on(
    psi: &SpectralField,
    beta: f64,
    gamma: f64,
    lattice: FrequencyLattice,
) -> Result<GmcField> {
    if !psi.is_real() {
        return Err(Error::NotReal);
    }
    if !(beta > 0.0) || !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "chaos needs beta > 0 and finite gamma >= 1 (beta = {beta}, gamma = {gamma})"
        )));
    }
    let x = psi.embed(&lattice)?.to_physical_real()?;
    let values = x
        .iter()
        .map(|&v| Complex64::from_polar(gamma, beta * v))
        .collect();
    Ok(GmcField {
        beta,
        gamma,
        lattice,
        values,
    })
}
