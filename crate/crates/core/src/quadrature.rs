//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is estimated with a 20-point rule on the whole panel and on its
//! two halves; the difference is the panel error. The panel with the largest
//! error is bisected until the summed error drops below the tolerance.

use std::collections::BinaryHeap;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

const ORDER: usize = 20;
/// Maximum bisection depth of any panel.
pub const MAX_DEPTH: u32 = 40;
const MAX_PANELS: usize = 1 << 16;

static RULE: Lazy<([f64; ORDER], [f64; ORDER])> = Lazy::new(|| legendre_rule::<ORDER>());

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
fn legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    let n = N as f64;
    for i in 0..N {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=N {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn rule<const D: usize>(f: &impl Fn(f64) -> [f64; D], a: f64, b: f64) -> [f64; D] {
    let (x, w) = &*RULE;
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = [0.0; D];
    for i in 0..ORDER {
        let v = f(c + h * x[i]);
        for d in 0..D {
            acc[d] += w[i] * v[d];
        }
    }
    acc.iter_mut().for_each(|s| *s *= h);
    acc
}

struct Panel<const D: usize> {
    a: f64,
    b: f64,
    depth: u32,
    value: [f64; D],
    error: f64,
}

impl<const D: usize> PartialEq for Panel<D> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const D: usize> Eq for Panel<D> {}
impl<const D: usize> PartialOrd for Panel<D> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Panel<D> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel<const D: usize>(f: &impl Fn(f64) -> [f64; D], a: f64, b: f64, depth: u32) -> Panel<D> {
    let whole = rule(f, a, b);
    let m = 0.5 * (a + b);
    let left = rule(f, a, m);
    let right = rule(f, m, b);
    let mut value = [0.0; D];
    let mut error = 0.0f64;
    for d in 0..D {
        value[d] = left[d] + right[d];
        error = error.max((value[d] - whole[d]).abs());
    }
    Panel {
        a,
        b,
        depth,
        value,
        error,
    }
}

/// Integrates a vector-valued function over `[a, b]` to absolute tolerance
/// `abs_tol` (componentwise maximum). Errors at the level of floating-point
/// round-off of the result are accepted as converged.
pub fn integrate_vec<const D: usize>(
    f: impl Fn(f64) -> [f64; D],
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<[f64; D]> {
    if a == b {
        return Ok([0.0; D]);
    }
    let mut heap = BinaryHeap::new();
    heap.push(panel(&f, a, b, 0));
    loop {
        let mut total = [0.0; D];
        let mut err = 0.0;
        let mut scale = 0.0f64;
        for p in heap.iter() {
            for d in 0..D {
                total[d] += p.value[d];
                scale = scale.max(p.value[d].abs());
            }
            err += p.error;
        }
        let total_scale = total.iter().fold(scale, |s, v| s.max(v.abs()));
        let floor = 64.0 * f64::EPSILON * total_scale * (heap.len() as f64).sqrt();
        if err <= abs_tol.max(floor) {
            return Ok(total);
        }
        let worst = heap.pop().expect("non-empty panel heap");
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_PANELS {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: total[0],
                error: err,
            });
        }
        let m = 0.5 * (worst.a + worst.b);
        heap.push(panel(&f, worst.a, m, worst.depth + 1));
        heap.push(panel(&f, m, worst.b, worst.depth + 1));
    }
}

/// Scalar version of [`integrate_vec`].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    Ok(integrate_vec(|x| [f(x)], a, b, abs_tol)?[0])
}

/// `int_a^b f` split at the points `tau, 2 tau, 4 tau, ...` so that features
/// near `s = 0` of width `tau` cannot be stepped over.
pub(crate) fn graded_integral<const D: usize>(
    f: impl Fn(f64) -> [f64; D],
    a: f64,
    b: f64,
    tau: f64,
    tol: f64,
) -> Result<[f64; D]> {
    let mut acc = [0.0; D];
    let mut lo = a;
    let mut edge = tau;
    while lo < b {
        while edge <= lo {
            edge *= 2.0;
        }
        let hi = edge.min(b);
        let part = integrate_vec(&f, lo, hi, tol)?;
        for (s, p) in acc.iter_mut().zip(part) {
            *s += p;
        }
        lo = hi;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let v = rule(&|x: f64| [x.powi(39) + x.powi(10)], 0.0, 1.0)[0];
        assert!((v - (1.0 / 40.0 + 1.0 / 11.0)).abs() < 1e-14);
    }

    #[test]
    fn smooth_and_oscillatory() {
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-12).unwrap();
        assert!((v - (1.0 - (-50f64).exp())).abs() < 1e-12);
        let w = integrate(|x| (200.0 * x).sin().powi(2), 0.0, 1.0, 1e-12).unwrap();
        let exact = 0.5 - (400f64).sin() / 800.0;
        assert!((w - exact).abs() < 1e-12, "{w} vs {exact}");
    }

    #[test]
    fn vector_components() {
        let v = integrate_vec(|x| [x, x * x, x.cos()], 0.0, 2.0, 1e-13).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-13);
        assert!((v[1] - 8.0 / 3.0).abs() < 1e-13);
        assert!((v[2] - 2f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn graded_resolves_narrow_peak() {
        let k = 1e5;
        let [v] = graded_integral(|s| [(-2.0 * s * k).exp()], 0.0, 1.0, 0.25 / k, 1e-15).unwrap();
        assert!((v - 0.5 / k).abs() < 1e-12 / k, "{v}");
        let [w] = graded_integral(|s| [(-2.0 * s * k).exp()], 1e-5, 1.0, 0.25 / k, 1e-15).unwrap();
        assert!((w - (-2e-5 * k).exp() * 0.5 / k).abs() < 1e-12 / k, "{w}");
    }
}
