//! Numerical sup-bounds for the multiplier estimates of the damped-wave symbols.
//!
//! Each constant is the supremum of `|symbol| / bound` over a finite grid of
//! `(eps, <n>, t)`. Points whose bound underflows are skipped and counted.

use serde::{Deserialize, Serialize};

use super::damped_pair;

/// Bounds below this are treated as underflowed.
const TINY: f64 = 1e-280;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateGrid {
    pub eps: Vec<f64>,
    pub times: Vec<f64>,
    /// Largest `<n>` on the lattice.
    pub max_bracket: f64,
    pub theta: f64,
}

impl Default for CertificateGrid {
    fn default() -> Self {
        let times = (0..48)
            .map(|i| 1e-4 * (5e4f64).powf(i as f64 / 47.0))
            .collect();
        Self {
            eps: vec![0.05, 0.07, 0.1, 0.14, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0],
            times,
            max_bracket: 64.0,
            theta: 0.1,
        }
    }
}

impl CertificateGrid {
    /// Distinct values of `<n>^2 = 1 + n1^2 + n2^2` with `<n> <= max_bracket`.
    pub fn bracket_squares(&self) -> Vec<f64> {
        let cap = (self.max_bracket * self.max_bracket).floor() as i64;
        let mut seen = vec![false; cap as usize + 1];
        let r = (cap as f64).sqrt() as i64 + 1;
        for a in 0..=r {
            for b in 0..=a {
                let k = 1 + a * a + b * b;
                if k <= cap {
                    seen[k as usize] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(k, _)| k as f64)
            .collect()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MultiplierCertificates {
    /// `sup eps^-2 |D| e^{theta t <n>^2}` on `<n> <= (1+theta)/(2 eps)`.
    pub mul1: f64,
    /// `sup |D'| e^{theta t <n>^2}` on the low range.
    pub mul2_low: f64,
    /// `sup |D'| e^{t/(2 eps^2)}` on `<n> > (1+theta)/(2 eps)`.
    pub mul2_high: f64,
    /// `|eps^-2 D - e^{-t<n>^2}| / (e^{-t/(2eps^2)} + eps^{2theta} e^{-t<n>^2/2})` on `<n> <= eps^{theta-1}`.
    pub mul3: f64,
    /// `|combined - e^{-t<n>^2}| / (eps^{2theta} e^{-t<n>^2/2})` on `<n> <= eps^{theta-1}`.
    pub mul4: f64,
    pub points: usize,
    pub skipped: usize,
}

impl MultiplierCertificates {
    pub fn all_finite(&self) -> bool {
        [
            self.mul1,
            self.mul2_low,
            self.mul2_high,
            self.mul3,
            self.mul4,
        ]
        .iter()
        .all(|c| c.is_finite())
    }
}

fn bump(slot: &mut f64, num: f64, den: f64, skipped: &mut usize) {
    if den < TINY || !den.is_finite() {
        *skipped += 1;
        return;
    }
    let r = num / den;
    if r > *slot || r.is_nan() {
        *slot = r;
    }
}

pub fn multiplier_certificates(grid: &CertificateGrid) -> MultiplierCertificates {
    let ks = grid.bracket_squares();
    let th = grid.theta;
    let mut out = MultiplierCertificates::default();
    for &eps in &grid.eps {
        let a = 0.5 / (eps * eps);
        let low_edge = (1.0 + th) / (2.0 * eps);
        let conv_edge = eps.powf(th - 1.0);
        let eps2th = eps.powf(2.0 * th);
        for &k2 in &ks {
            let nb = k2.sqrt();
            for &t in &grid.times {
                out.points += 1;
                let (d, c) = damped_pair(eps, k2, t);
                let dd = c - a * d;
                let heat = (-t * k2).exp();
                if nb <= low_edge {
                    let w = (th * t * k2).exp();
                    out.mul1 = out.mul1.max(2.0 * a * d.abs() * w);
                    out.mul2_low = out.mul2_low.max(dd.abs() * w);
                } else {
                    // Undamped derivative: e^{at} D' = cos(zeta t) - a sin(zeta t)/zeta.
                    let zeta = (4.0 * k2 * eps * eps - 1.0).sqrt() * a;
                    let (s, co) = (zeta * t).sin_cos();
                    out.mul2_high = out.mul2_high.max((co - a * s / zeta).abs());
                }
                if nb <= conv_edge {
                    let decay = (-a * t).exp();
                    let half = eps2th * (-0.5 * t * k2).exp();
                    bump(
                        &mut out.mul3,
                        (2.0 * a * d - heat).abs(),
                        decay + half,
                        &mut out.skipped,
                    );
                    bump(
                        &mut out.mul4,
                        (c + a * d - heat).abs(),
                        half,
                        &mut out.skipped,
                    );
                }
            }
        }
    }
    out
}
