//! Exact mode-wise symbols of the damped-wave propagator
//! `eps^2 u'' + u' + <n>^2 u = 0` and of the heat semigroup `e^{-t<n>^2}`.
//!
//! Every symbol depends on the frequency only through `k2 = <n>^2`. With
//! `a = 1/(2 eps^2)` and `lam2 = a^2 - 2 a k2` the propagator symbol is
//!
//! ```text
//! D(t) = e^{-a t} t phi(t^2 lam2),   phi(x) = sum_j x^j / (2j+1)!
//! ```
//!
//! which is `e^{-at} sinh(lam t)/lam` below the crossover `<n> = 1/(2 eps)` and
//! `e^{-at} sin(zeta t)/zeta` above it. The power series is used when
//! `|t^2 lam2| <= 1`; closed forms otherwise, written so that nothing
//! overflows at small `eps`.

mod certificates;

pub use certificates::{multiplier_certificates, CertificateGrid, MultiplierCertificates};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::{bracket_sq, SpectralField};

/// Absolute tolerance of the Duhamel-weight quadrature.
pub const DUHAMEL_TOL: f64 = 1e-12;

const SERIES_CUTOFF: f64 = 1e-18;

/// `(eps, n, t)`, with `n` stored as `k2 = <n>^2`. `eps = 0` selects heat symbols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSymbolQuery {
    pub eps: f64,
    pub k2: f64,
    pub t: f64,
}

impl ModeSymbolQuery {
    pub fn new(eps: f64, n: (i64, i64), t: f64) -> Self {
        Self {
            eps,
            k2: bracket_sq(n.0, n.1),
            t,
        }
    }

    pub fn from_bracket_sq(eps: f64, k2: f64, t: f64) -> Self {
        Self { eps, k2, t }
    }

    fn require_wave(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "damped-wave symbol needs eps > 0, got {}",
                self.eps
            )));
        }
        if !(self.t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t must be non-negative, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// `phi(x) = sum_{j>=0} x^j/(2j+1)!`: `sinh(sqrt x)/sqrt x` for `x > 0`,
/// `sin(sqrt -x)/sqrt -x` for `x < 0`.
pub fn phi_series(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        series(x, 1)
    } else if x > 0.0 {
        let r = x.sqrt();
        r.sinh() / r
    } else {
        let r = (-x).sqrt();
        r.sin() / r
    }
}

/// `psi(x) = sum_{j>=0} x^j/(2j)!`: `cosh(sqrt x)` or `cos(sqrt -x)`.
pub fn psi_series(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        series(x, 0)
    } else if x > 0.0 {
        x.sqrt().cosh()
    } else {
        (-x).sqrt().cos()
    }
}

/// `sum_j x^j / (2j + offset)!` for `|x| <= 1`.
fn series(x: f64, offset: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = term;
    let mut j = 0u32;
    loop {
        let d1 = (2 * j + offset + 1) as f64;
        let d2 = (2 * j + offset + 2) as f64;
        term *= x / (d1 * d2);
        sum += term;
        j += 1;
        if term.abs() < SERIES_CUTOFF {
            return sum;
        }
    }
}

/// `(D, e^{-at} psi(t^2 lam2))` for `eps > 0`.
pub(crate) fn damped_pair(eps: f64, k2: f64, t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (0.0, 1.0);
    }
    let e2 = eps * eps;
    let a = 0.5 / e2;
    let disc = 1.0 - 4.0 * k2 * e2;
    let lam2 = disc * a * a;
    let x = t * t * lam2;
    if x.abs() <= 1.0 {
        let damp = (-a * t).exp();
        (damp * t * series(x, 1), damp * series(x, 0))
    } else if disc > 0.0 {
        let r = disc.sqrt();
        let lam = r * a;
        // Lambda^+ = -2 k2 / (1 + r) avoids cancellation in lam - a.
        let grow = (-2.0 * k2 / (1.0 + r) * t).exp();
        let decay = ((-a - lam) * t).exp();
        ((grow - decay) / (2.0 * lam), 0.5 * (grow + decay))
    } else {
        let zeta = (-disc).sqrt() * a;
        let damp = (-a * t).exp();
        let (s, c) = (zeta * t).sin_cos();
        (damp * s / zeta, damp * c)
    }
}

/// Symbol `D_eps(n, t)` of the damped-wave propagator.
pub fn dhat(q: ModeSymbolQuery) -> Result<f64> {
    q.require_wave()?;
    Ok(damped_pair(q.eps, q.k2, q.t).0)
}

/// `d/dt D_eps(n, t) = -D/(2 eps^2) + e^{-t/(2eps^2)} psi(t^2 lam2)`.
pub fn dhat_dt(q: ModeSymbolQuery) -> Result<f64> {
    q.require_wave()?;
    let (d, c) = damped_pair(q.eps, q.k2, q.t);
    Ok(c - 0.5 / (q.eps * q.eps) * d)
}

/// Heat symbol `e^{-t <n>^2}`.
pub fn heat_symbol(k2: f64, t: f64) -> f64 {
    (-t * k2).exp()
}

/// `(eps^{-2} + d/dt) D_eps(n, t)` for `eps > 0`, and the heat symbol at `eps = 0`.
pub fn combined_symbol(q: ModeSymbolQuery) -> f64 {
    if q.eps == 0.0 {
        return heat_symbol(q.k2, q.t);
    }
    let (d, c) = damped_pair(q.eps, q.k2, q.t);
    c + 0.5 / (q.eps * q.eps) * d
}

/// Exact transition of `(u^(n), d/dt u^(n))` over a step `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeTransition {
    pub eps: f64,
    pub k2: f64,
    pub h: f64,
    pub matrix: [[f64; 2]; 2],
}

impl ModeTransition {
    pub fn apply<T>(&self, u: T, du: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let m = &self.matrix;
        (u * m[0][0] + du * m[0][1], u * m[1][0] + du * m[1][1])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn compose(&self, other: &ModeTransition) -> [[f64; 2]; 2] {
        let (a, b) = (&self.matrix, &other.matrix);
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

/// `M(h)` with `M11 = D' + D/eps^2`, `M12 = D`, `M21 = -<n>^2 D / eps^2`,
/// `M22 = D'`, using `D'' = -(D' + <n>^2 D)/eps^2`.
pub fn mode_transition(eps: f64, k2: f64, h: f64) -> Result<ModeTransition> {
    if !(eps > 0.0) || !(h >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mode transition needs eps > 0 and h >= 0 (eps = {eps}, h = {h})"
        )));
    }
    let (d, c) = damped_pair(eps, k2, h);
    let a = 0.5 / (eps * eps);
    Ok(ModeTransition {
        eps,
        k2,
        h,
        matrix: [[c + a * d, d], [-2.0 * a * k2 * d, c - a * d]],
    })
}

/// `int_0^h eps^{-2} D_eps(n, s) ds` for `eps > 0`, `(1 - e^{-h<n>^2})/<n>^2` at `eps = 0`.
pub fn duhamel_weight(eps: f64, k2: f64, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "h must be non-negative, got {h}"
        )));
    }
    if eps == 0.0 {
        return Ok(-(-h * k2).exp_m1() / k2);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    let scale = 1.0 / (eps * eps);
    quadrature::integrate(|s| scale * damped_pair(eps, k2, s).0, 0.0, h, DUHAMEL_TOL)
}

/// Initial data `(phi0, phi1)`; `phi1` is ignored by the heat flow.
#[derive(Clone, Debug)]
pub struct InitialDataPair {
    pub phi0: SpectralField,
    pub phi1: SpectralField,
}

impl InitialDataPair {
    pub fn new(phi0: SpectralField, phi1: SpectralField) -> Result<Self> {
        phi0.lattice().check_same(phi1.lattice())?;
        if !phi0.is_real() || !phi1.is_real() {
            return Err(Error::NotReal);
        }
        Ok(Self { phi0, phi1 })
    }

    pub fn zero(lattice: crate::spectral::FrequencyLattice) -> Self {
        Self {
            phi0: SpectralField::zeros(lattice, true),
            phi1: SpectralField::zeros(lattice, true),
        }
    }

    /// `(||phi0||_{H^s}^2 + ||phi1||_{H^{s-1}}^2)^{1/2}`.
    pub fn norm(&self, s: f64) -> f64 {
        self.phi0
            .sobolev_norm(s)
            .hypot(self.phi1.sobolev_norm(s - 1.0))
    }
}

/// Homogeneous linear solution `P_eps(t)(phi0, phi1)`.
pub fn apply_p_eps(data: &InitialDataPair, eps: f64, t: f64) -> Result<SpectralField> {
    if !(eps >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "P_eps needs eps >= 0 and t >= 0 (eps = {eps}, t = {t})"
        )));
    }
    let lat = *data.phi0.lattice();
    let mut out = SpectralField::zeros(lat, true);
    let (p0, p1) = (data.phi0.coeffs(), data.phi1.coeffs());
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (n1, n2) = lat.mode(i);
        let k2 = bracket_sq(n1, n2);
        *c = if eps == 0.0 {
            p0[i] * heat_symbol(k2, t)
        } else {
            let (d, cc) = damped_pair(eps, k2, t);
            p0[i] * (cc + 0.5 / (eps * eps) * d) + p1[i] * d
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(eps: f64, k2: f64, t: f64) -> ModeSymbolQuery {
        ModeSymbolQuery::from_bracket_sq(eps, k2, t)
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi_series(0.0), 1.0);
        assert!((phi_series(1.0) - 1.175_201_193_643_801_4).abs() < 1e-15);
        assert!(phi_series(-std::f64::consts::PI.powi(2)).abs() < 1e-15);
        // series and closed form agree on both sides of the switch
        for &x in &[-1.0f64, -0.999, 0.999, 1.0] {
            let closed = if x > 0.0 {
                x.sqrt().sinh() / x.sqrt()
            } else {
                (-x).sqrt().sin() / (-x).sqrt()
            };
            assert!((phi_series(x) - closed).abs() < 1e-15);
            assert!(
                (series(x, 0)
                    - if x > 0.0 {
                        x.sqrt().cosh()
                    } else {
                        (-x).sqrt().cos()
                    })
                .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn dhat_at_zero_time() {
        for &(eps, k2) in &[(0.1, 1.0), (0.5, 30.0), (1.0, 2.0)] {
            assert_eq!(dhat(q(eps, k2, 0.0)).unwrap(), 0.0);
            assert_eq!(dhat_dt(q(eps, k2, 0.0)).unwrap(), 1.0);
            assert_eq!(combined_symbol(q(eps, k2, 0.0)), 1.0);
        }
        assert_eq!(combined_symbol(q(0.0, 5.0, 0.0)), 1.0);
    }

    #[test]
    fn crossover_double_root() {
        // eps = 0.5, n = 0: lam = 0, D = t e^{-2t}, D' = (1 - 2t) e^{-2t}
        let e2 = (-2f64).exp();
        assert!((dhat(q(0.5, 1.0, 1.0)).unwrap() - e2).abs() < 1e-16);
        assert!((dhat_dt(q(0.5, 1.0, 1.0)).unwrap() + e2).abs() < 1e-16);
    }

    #[test]
    fn heat_symbol_cases() {
        assert_eq!(heat_symbol(7.0, 0.0), 1.0);
        assert!((heat_symbol(1.0, 1.0) - 0.367_879_441_171_442_3).abs() < 1e-16);
        for &(s, t) in &[(0.1, 0.3), (1.0, 2.5), (0.01, 0.02)] {
            let k2 = 13.0;
            let lhs = heat_symbol(k2, s) * heat_symbol(k2, t);
            assert!((lhs - heat_symbol(k2, s + t)).abs() <= 1e-14 * lhs.max(1e-300));
        }
    }

    #[test]
    fn rejects_heat_in_wave_symbols() {
        assert!(dhat(q(0.0, 1.0, 1.0)).is_err());
        assert!(dhat_dt(q(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn two_formula_combined_symbol() {
        // P + R decomposition (valid below the crossover).
        let (eps, k2, t) = (0.1f64, 1.0f64, 1.0f64);
        let r = (1.0 - 4.0 * k2 * eps * eps).sqrt();
        let lp = (-1.0 + r) / (2.0 * eps * eps);
        let lm = (-1.0 - r) / (2.0 * eps * eps);
        let p = (lp * t).exp() / r;
        let rr = (1.0 - 1.0 / r) * (lp * t).exp() / 2.0 + (1.0 - 1.0 / r) * (lm * t).exp() / 2.0;
        let direct = dhat(q(eps, k2, t)).unwrap() / (eps * eps) + dhat_dt(q(eps, k2, t)).unwrap();
        assert!((p + rr - direct).abs() < 1e-10);
        assert!((combined_symbol(q(eps, k2, t)) - direct).abs() < 1e-14);
    }

    #[test]
    fn transition_basic_properties() {
        for &(eps, k2) in &[
            (0.1, 1.0),
            (0.1, 26.0),
            (0.2, 6.25),
            (0.05, 401.0),
            (1.0, 3.0),
        ] {
            for &h in &[1e-6, 0.01, 0.3, 1.0] {
                let m = mode_transition(eps, k2, h).unwrap();
                let want = (-h / (eps * eps)).exp();
                let det = m.determinant();
                let mm = m.matrix;
                let size = (mm[0][0] * mm[1][1]).abs() + (mm[0][1] * mm[1][0]).abs();
                assert!(
                    (det - want).abs() <= 1e-9 * want + 1e-14 * size,
                    "det {det} vs {want}"
                );
                let two = mode_transition(eps, k2, 2.0 * h).unwrap();
                let comp = m.compose(&m);
                for i in 0..2 {
                    for j in 0..2 {
                        let scale = two.matrix[i][j].abs().max(1e-12 * (1.0 + k2 / (eps * eps)));
                        assert!(
                            (comp[i][j] - two.matrix[i][j]).abs()
                                <= 1e-9 * scale.max(1e-300) + 1e-13
                        );
                    }
                }
            }
        }
        let id = mode_transition(0.3, 5.0, 0.0).unwrap();
        assert_eq!(id.matrix, [[1.0, 0.0], [0.0, 1.0]]);
        let small = mode_transition(0.3, 5.0, 1e-7).unwrap();
        assert!((small.matrix[0][0] - 1.0).abs() < 1e-5 && (small.matrix[1][1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn transition_crossover_closed_form() {
        // Double root -2: u(t) = e^{-2t}((1 + 2t) u0 + t u1).
        let m = mode_transition(0.5, 1.0, 1.0).unwrap();
        let e2 = (-2f64).exp();
        assert!((m.matrix[0][0] - 3.0 * e2).abs() < 1e-15);
        assert!((m.matrix[0][1] - e2).abs() < 1e-15);
        // u'(t) = e^{-2t}(-4t u0 + (1 - 2t) u1)
        assert!((m.matrix[1][0] + 4.0 * e2).abs() < 1e-15);
        assert!((m.matrix[1][1] + e2).abs() < 1e-15);
    }

    #[test]
    fn duhamel_weight_cases() {
        assert!((duhamel_weight(0.0, 1.0, 1.0).unwrap() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((duhamel_weight(0.5, 1.0, 1.0).unwrap() - 0.593_994_150_290_161_9).abs() < 1e-12);
        assert!((duhamel_weight(0.5, 1.0, 50.0).unwrap() - 1.0).abs() < 1e-12);
        for &eps in &[0.0, 0.1, 0.7] {
            let w = duhamel_weight(eps, 10.0, 1e-6).unwrap();
            assert!(w.abs() <= 2e-6);
        }
        // Stationary gain 1/<n>^2 for every eps.
        for &eps in &[0.1, 0.3] {
            let w = duhamel_weight(eps, 5.0, 40.0).unwrap();
            assert!((w - 0.2).abs() < 1e-11, "{w}");
        }
    }
}
