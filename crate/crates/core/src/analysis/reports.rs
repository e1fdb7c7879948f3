use std::io::Write;

use serde::{Deserialize, Serialize};

use super::kernels::linear_fit;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Additive band `c1 <= value - prediction <= c2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub c1: f64,
    pub c2: f64,
    pub width: f64,
    pub pass: bool,
}

pub fn band(prediction: &[f64], value: &[f64], width: f64) -> Band {
    let (mut c1, mut c2) = (f64::INFINITY, f64::NEG_INFINITY);
    for (p, v) in prediction.iter().zip(value) {
        c1 = c1.min(v - p);
        c2 = c2.max(v - p);
    }
    let pass = c1.is_finite() && c2.is_finite() && c2 - c1 <= width;
    Band {
        c1,
        c2,
        width,
        pass,
    }
}

/// `max_j ||u_a(t_j) - u_b(t_j)||_{H^s}` over the recorded times.
pub fn path_distance(a: &Trajectory, b: &Trajectory, s: f64) -> Result<f64> {
    if a.times.len() != b.times.len() {
        return Err(Error::InvalidArgument(format!(
            "trajectories record {} and {} times",
            a.times.len(),
            b.times.len()
        )));
    }
    let mut d = 0.0f64;
    for (j, (ta, tb)) in a.times.iter().zip(&b.times).enumerate() {
        if (ta - tb).abs() > 1e-12 * ta.abs().max(1.0) {
            return Err(Error::TimeMismatch {
                state: *ta,
                path: *tb,
            });
        }
        d = d.max(a.u[j].sub(&b.u[j])?.sobolev_norm(s));
    }
    Ok(d)
}

/// Distances indexed by a parameter, listed in the order the parameter shrinks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<(f64, f64)>,
    /// Slope of `log distance` against `log parameter`.
    pub slope: f64,
    /// Distances strictly decrease along `points`.
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let slope = fit_slope(&points)?;
        let monotone = points.windows(2).all(|w| w[1].1 < w[0].1);
        Ok(Self {
            points,
            slope,
            monotone,
        })
    }
}

fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(
            "rate fit needs at least three points".into(),
        ));
    }
    if let Some(&(p, d)) = points.iter().find(|(p, d)| !(*p > 0.0) || !(*d > 0.0)) {
        return Err(Error::NonPositive(if p > 0.0 { d } else { p }));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|(p, d)| (p.ln(), d.ln())).unzip();
    Ok(linear_fit(&x, &y).0)
}

/// Log-log slope of a convergence report, recomputed from its points.
pub fn fit_rate(report: &ConvergenceReport) -> Result<f64> {
    fit_slope(&report.points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckValue {
    Constant(f64),
    Band { c1: f64, c2: f64, width: f64 },
}

/// One machine-readable certificate outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: serde_json::Value,
    pub constant_or_band: CheckValue,
    pub pass: bool,
}

impl CheckRecord {
    pub fn constant(check: &str, params: serde_json::Value, value: f64, pass: bool) -> Self {
        Self {
            check: check.into(),
            params,
            constant_or_band: CheckValue::Constant(value),
            pass,
        }
    }

    pub fn band(check: &str, params: serde_json::Value, b: &Band) -> Self {
        Self {
            check: check.into(),
            params,
            constant_or_band: CheckValue::Band {
                c1: b.c1,
                c2: b.c2,
                width: b.width,
            },
            pass: b.pass,
        }
    }
}

/// CSV `check,pass,c1,c2,params` with `c1 = c2` for constants.
pub fn write_checks_csv(mut w: impl Write, checks: &[CheckRecord]) -> Result<()> {
    writeln!(w, "check,pass,c1,c2,params")?;
    for c in checks {
        let (lo, hi) = match c.constant_or_band {
            CheckValue::Constant(v) => (v, v),
            CheckValue::Band { c1, c2, .. } => (c1, c2),
        };
        let params = serde_json::to_string(&c.params)?.replace('"', "\"\"");
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},\"{}\"",
            c.check, c.pass, lo, hi, params
        )?;
    }
    Ok(())
}
