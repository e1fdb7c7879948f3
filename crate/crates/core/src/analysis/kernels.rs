use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::covariance::{torus_norm, CovarianceKernel};
use crate::error::{Error, Result};
use crate::spectral::SmoothCutoff;

fn norm() -> f64 {
    (2.0 * PI).powi(-2)
}

/// Partial sum over `<n> <= truncation` of the heat Green kernel, normalized so
/// that its `chi_N^2` projection is `Gamma_{0,N}`.
pub fn heat_green(t: f64, x: (f64, f64), truncation: f64) -> Result<f64> {
    if !(t >= 0.0) || !(truncation >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need t >= 0, truncation >= 1 (t = {t}, truncation = {truncation})"
        )));
    }
    let k = CovarianceKernel::from_weights(truncation.next_up(), |k2| {
        norm() * -(-2.0 * t * k2).exp_m1() / (2.0 * k2)
    });
    Ok(k.eval(x))
}

/// `chi_N^2` projection of the decaying part `sum e^{-2 t <n>^2} / (2 <n>^2)`.
pub fn heat_green_decaying(t: f64, x: (f64, f64), cutoff: f64) -> Result<f64> {
    if !(t >= 0.0) || !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t >= 0, cutoff > 0 (t = {t}, cutoff = {cutoff})"
        )));
    }
    let chi = SmoothCutoff;
    let k = CovarianceKernel::from_weights(2.0 * cutoff, |k2| {
        norm() * chi.weight(k2, cutoff).powi(2) * (-2.0 * t * k2).exp() / (2.0 * k2)
    });
    Ok(k.eval(x))
}

/// `sum chi_T(n) <n>^{-alpha} cos(n . x) / (2 pi)^2`.
pub fn bessel_kernel(alpha: f64, x: (f64, f64), truncation: f64) -> Result<f64> {
    Ok(bessel_builder(alpha, truncation)?.eval(x))
}

fn bessel_builder(alpha: f64, truncation: f64) -> Result<CovarianceKernel> {
    if !(alpha > 0.0 && alpha < 2.0) || !(truncation >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < alpha < 2, truncation >= 1 (alpha = {alpha})"
        )));
    }
    let chi = SmoothCutoff;
    Ok(CovarianceKernel::from_weights(
        2.0 * truncation,
        move |k2| norm() * chi.weight(k2, truncation) * k2.powf(-alpha / 2.0),
    ))
}

/// Least-squares fit `J_alpha(x) ~ c |x|^{alpha-2} + r` on sample points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BesselFit {
    pub alpha: f64,
    pub truncation: f64,
    pub coefficient: f64,
    pub offset: f64,
    /// Max of `|J_alpha - c |x|^{alpha-2}|` over the samples.
    pub remainder_bound: f64,
    /// Local slope of `log (J_alpha - r)` against `log |x|`.
    pub exponent: f64,
}

pub fn bessel_power_fit(alpha: f64, truncation: f64, points: &[(f64, f64)]) -> Result<BesselFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(
            "bessel fit needs at least three points".into(),
        ));
    }
    let k = bessel_builder(alpha, truncation)?;
    let samples: Vec<(f64, f64)> = points.iter().map(|&p| (torus_norm(p), k.eval(p))).collect();
    if samples.iter().any(|s| s.0 == 0.0) {
        return Err(Error::InvalidArgument(
            "bessel fit points must avoid the origin".into(),
        ));
    }
    let basis: Vec<f64> = samples.iter().map(|s| s.0.powf(alpha - 2.0)).collect();
    let (c, r) = linear_fit(&basis, &samples.iter().map(|s| s.1).collect::<Vec<_>>());
    let remainder_bound = samples
        .iter()
        .zip(&basis)
        .map(|(s, b)| (s.1 - c * b).abs())
        .fold(0.0, f64::max);
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 - r > 0.0)
        .map(|s| (s.0.ln(), (s.1 - r).ln()))
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = logs.into_iter().unzip();
    let exponent = if lx.len() >= 2 {
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    Ok(BesselFit {
        alpha,
        truncation,
        coefficient: c,
        offset: r,
        remainder_bound,
        exponent,
    })
}

/// Ordinary least squares `y ~ a x + b`, returning `(a, b)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}
