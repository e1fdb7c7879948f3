use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagators::{damped_pair, duhamel_weight, mode_transition, DUHAMEL_TOL};
use crate::quadrature::graded_integral;

const PSD_TOL: f64 = 1e-12;

/// One exact step of a mode of the stochastic convolution.
///
/// With standardized innovations `z0, z1, z2` (shared across states) the update is
///
/// ```text
/// psi  <- m00 psi + m01 dpsi + b0 z0 + l00 z1
/// dpsi <- m10 psi + m11 dpsi + b1 z0 + l10 z1 + l11 z2
/// ```
///
/// per real component, scaled by `1/sqrt 2` off the zero mode. `z0` is the
/// standardized Brownian increment, `b` the covariance of the step noise with
/// it, and `l` the Cholesky factor of the conditional residual. At `eps = 0`
/// only the first row is used.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepCoeffs {
    pub m: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub l: [[f64; 2]; 2],
}

impl StepCoeffs {
    /// Frozen-force Duhamel weights `(int_0^h eps^-2 D, eps^-2 D(h))` for a step `h`;
    /// `((1 - e^{-h<n>^2})/<n>^2, 0)` at `eps = 0`.
    pub fn duhamel(&self, h: f64) -> [f64; 2] {
        let rh = h.sqrt();
        [self.b[0] * rh, self.b[1] * rh]
    }

    /// Total one-step noise covariance `b b^T + l l^T`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let (b, l) = (self.b, self.l);
        [
            [
                b[0] * b[0] + l[0][0] * l[0][0],
                b[0] * b[1] + l[0][0] * l[1][0],
            ],
            [
                b[0] * b[1] + l[0][0] * l[1][0],
                b[1] * b[1] + l[1][0] * l[1][0] + l[1][1] * l[1][1],
            ],
        ]
    }
}

fn min_eigenvalue(q: [[f64; 2]; 2]) -> f64 {
    let tr = q[0][0] + q[1][1];
    let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    0.5 * tr - disc
}

/// Shortest time scale of a mode: the heat rate `<n>^2` or the damping `eps^-2`.
pub(crate) fn fast_scale(eps: f64, k2: f64) -> f64 {
    let rate = if eps > 0.0 {
        k2.max(1.0 / (eps * eps))
    } else {
        k2
    };
    0.25 / rate
}

fn check_args(eps: f64, k2: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !(eps >= 0.0) || !(k2 >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "noise transition needs h > 0, eps >= 0, <n>^2 >= 1 (h = {h}, eps = {eps}, <n>^2 = {k2})"
        )));
    }
    Ok(())
}

/// Covariance of `(Psi^(n), d/dt Psi^(n))` accumulated over one step of length
/// `h` from zero data, per unit of `E|dB_n|^2 / h`.
pub fn transition_cov(eps: f64, k2: f64, h: f64) -> Result<[[f64; 2]; 2]> {
    check_args(eps, k2, h)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(
            "transition_cov needs eps > 0".into(),
        ));
    }
    let s = 1.0 / (eps * eps);
    let a = 0.5 * s;
    let [q11, q12, q22] = graded_integral(
        |t| {
            let (d, c) = damped_pair(eps, k2, t);
            let (f1, f2) = (s * d, s * (c - a * d));
            [f1 * f1, f1 * f2, f2 * f2]
        },
        0.0,
        h,
        fast_scale(eps, k2),
        DUHAMEL_TOL,
    )?;
    let q = [[q11, q12], [q12, q22]];
    let min = min_eigenvalue(q);
    if min < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(q)
}

fn clipped_cholesky(r: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let min = min_eigenvalue(r);
    if min < -PSD_TOL * (1.0 + r[0][0].abs() + r[1][1].abs()) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let l00 = r[0][0].max(0.0).sqrt();
    let l10 = if l00 > 0.0 { r[1][0] / l00 } else { 0.0 };
    let l11 = (r[1][1] - l10 * l10).max(0.0).sqrt();
    Ok([[l00, 0.0], [l10, l11]])
}

/// Step coefficients for `<n>^2 = k2`; `eps = 0` is the heat (Ornstein-Uhlenbeck) case.
pub fn step_coeffs(eps: f64, k2: f64, h: f64) -> Result<StepCoeffs> {
    check_args(eps, k2, h)?;
    let rh = h.sqrt();
    if eps == 0.0 {
        let w = duhamel_weight(0.0, k2, h)?;
        let mu = w / h;
        // Residual variance int_0^h (e^{-s k2} - mu)^2 ds, integrated centered.
        let [r] = graded_integral(
            |s| {
                let f = (-s * k2).exp() - mu;
                [f * f]
            },
            0.0,
            h,
            fast_scale(0.0, k2),
            DUHAMEL_TOL * 1e-3,
        )?;
        return Ok(StepCoeffs {
            m: [[(-h * k2).exp(), 0.0], [0.0, 0.0]],
            b: [w / rh, 0.0],
            l: [[r.max(0.0).sqrt(), 0.0], [0.0, 0.0]],
        });
    }
    let trans = mode_transition(eps, k2, h)?;
    let s = 1.0 / (eps * eps);
    let a = 0.5 * s;
    let w1 = duhamel_weight(eps, k2, h)?;
    let w2 = s * trans.matrix[0][1];
    let (mu1, mu2) = (w1 / h, w2 / h);
    let [r11, r12, r22] = graded_integral(
        |t| {
            let (d, c) = damped_pair(eps, k2, t);
            let f1 = s * d - mu1;
            let f2 = s * (c - a * d) - mu2;
            [f1 * f1, f1 * f2, f2 * f2]
        },
        0.0,
        h,
        fast_scale(eps, k2),
        DUHAMEL_TOL * 1e-3,
    )?;
    Ok(StepCoeffs {
        m: trans.matrix,
        b: [w1 / rh, w2 / rh],
        l: clipped_cholesky([[r11, r12], [r12, r22]])?,
    })
}

type TableKey = (u64, u64);

static TABLES: Lazy<Mutex<HashMap<TableKey, Arc<HashMap<u64, StepCoeffs>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Step coefficients for every `|n|^2` in `nsqs`, memoized per `(eps, h)`.
/// Returned tables are immutable; a later request for more modes replaces
/// the cached table with a superset.
pub fn coefficient_table(eps: f64, h: f64, nsqs: &[u64]) -> Result<Arc<HashMap<u64, StepCoeffs>>> {
    let key = (eps.to_bits(), h.to_bits());
    let cached = TABLES
        .lock()
        .expect("coefficient cache poisoned")
        .get(&key)
        .cloned();
    let missing: Vec<u64> = match &cached {
        Some(t) => nsqs
            .iter()
            .copied()
            .filter(|q| !t.contains_key(q))
            .collect(),
        None => nsqs.to_vec(),
    };
    if missing.is_empty() {
        if let Some(t) = cached {
            return Ok(t);
        }
    }
    let fresh: Vec<(u64, StepCoeffs)> = missing
        .par_iter()
        .map(|&q| step_coeffs(eps, 1.0 + q as f64, h).map(|c| (q, c)))
        .collect::<Result<_>>()?;
    let mut tables = TABLES.lock().expect("coefficient cache poisoned");
    let mut merged: HashMap<u64, StepCoeffs> =
        tables.get(&key).map(|t| (**t).clone()).unwrap_or_default();
    merged.extend(fresh);
    let merged = Arc::new(merged);
    tables.insert(key, merged.clone());
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_small_step_scaling() {
        let (eps, k2) = (0.3, 5.0);
        let q1 = transition_cov(eps, k2, 1e-3).unwrap();
        let q2 = transition_cov(eps, k2, 2e-3).unwrap();
        // Q11 ~ h^3 / (3 eps^4), Q22 ~ h / eps^4
        assert!((q2[0][0] / q1[0][0] - 8.0).abs() < 0.1);
        assert!((q2[1][1] / q1[1][1] - 2.0).abs() < 0.05);
        let e4 = eps.powi(4);
        assert!((q1[0][0] * 3.0 * e4 / 1e-9 - 1.0).abs() < 0.05);
    }

    #[test]
    fn cauchy_schwarz_on_grid() {
        for &eps in &[0.05, 0.2, 1.0] {
            for &k2 in &[1.0, 10.0, 401.0] {
                for &h in &[1e-3, 0.05, 1.0] {
                    let q = transition_cov(eps, k2, h).unwrap();
                    assert!(q[0][1] * q[0][1] <= q[0][0] * q[1][1] * (1.0 + 1e-10));
                }
            }
        }
    }

    #[test]
    fn stationary_variance() {
        // eps = 0.5, n = 0: int_0^inf (4 s e^{-2s})^2 ds = 1/2
        let q = transition_cov(0.5, 1.0, 50.0).unwrap();
        assert!((q[0][0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn conditional_split_reproduces_covariance() {
        for &eps in &[0.0, 0.05, 0.3] {
            for &k2 in &[1.0, 17.0, 900.0] {
                for &h in &[1e-3, 0.02, 0.5] {
                    let c = step_coeffs(eps, k2, h).unwrap();
                    let tot = c.covariance();
                    if eps > 0.0 {
                        let q = transition_cov(eps, k2, h).unwrap();
                        for i in 0..2 {
                            for j in 0..2 {
                                let scale = (q[i][i] * q[j][j]).sqrt();
                                assert!(
                                    (tot[i][j] - q[i][j]).abs() <= 1e-9 * scale,
                                    "{eps} {k2} {h}"
                                );
                            }
                        }
                    } else {
                        let v = -(-2.0 * h * k2).exp_m1() / (2.0 * k2);
                        assert!((tot[0][0] - v).abs() <= 1e-12 * v);
                    }
                }
            }
        }
    }

    #[test]
    fn cache_returns_superset() {
        let a = coefficient_table(0.21, 0.01, &[0, 1, 2]).unwrap();
        let b = coefficient_table(0.21, 0.01, &[2, 5]).unwrap();
        assert!(b.contains_key(&0) && b.contains_key(&5));
        assert_eq!(a[&1], b[&1]);
        let c = coefficient_table(0.21, 0.01, &[1]).unwrap();
        assert!(Arc::ptr_eq(&b, &c));
    }
}
