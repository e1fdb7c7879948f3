use std::io::Write;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::FrequencyLattice;

/// Three standard complex Gaussians per `(n, j)`; real and imaginary parts
/// are independent with unit variance. Only real parts are used at `n = 0`.
pub type Innovations = [Complex64; 3];

/// Representative of `{n, -n}` in the upper half-plane, and whether `n` was flipped.
pub fn canonical_mode(n: (i64, i64)) -> ((i64, i64), bool) {
    if n.1 > 0 || (n.1 == 0 && n.0 >= 0) {
        (n, false)
    } else {
        ((-n.0, -n.1), true)
    }
}

/// Wiener increments `dB_n(j)` on the uniform grid `t_j = j T / K`.
///
/// Nothing is stored: every increment is regenerated on demand from a
/// ChaCha stream selected by the mode, at a block selected by the step.
#[derive(Clone, Debug)]
pub struct NoisePath {
    seed: u64,
    horizon: f64,
    steps: usize,
    lattice: FrequencyLattice,
    base: ChaCha8Rng,
}

pub fn sample_path(
    seed: u64,
    lattice: FrequencyLattice,
    horizon: f64,
    steps: usize,
) -> Result<NoisePath> {
    if steps == 0 || !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise path needs K >= 1 and T > 0 (K = {steps}, T = {horizon})"
        )));
    }
    Ok(NoisePath {
        seed,
        horizon,
        steps,
        lattice,
        base: ChaCha8Rng::seed_from_u64(seed),
    })
}

#[inline]
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(u: u64, v: u64) -> Complex64 {
    let r = (-2.0 * unit_open(u).ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * unit_open(v)).sin_cos();
    Complex64::new(r * c, r * s)
}

impl NoisePath {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.horizon
        } else {
            j as f64 * self.dt()
        }
    }

    /// Standardized innovations of a canonical mode at step `j`.
    pub fn innovations(&self, n: (i64, i64), j: usize) -> Innovations {
        debug_assert!(!canonical_mode(n).1);
        let mut rng = self.base.clone();
        let stream = ((n.0 as i32 as u32 as u64) << 32) | (n.1 as i32 as u32 as u64);
        rng.set_stream(stream);
        rng.set_word_pos(j as u128 * 16);
        let mut z = [Complex64::default(); 3];
        for slot in z.iter_mut() {
            let u = rng.next_u64();
            let v = rng.next_u64();
            *slot = box_muller(u, v);
        }
        if n == (0, 0) {
            for slot in z.iter_mut() {
                slot.im = 0.0;
            }
        }
        z
    }

    /// `dB_n(j) = B_n(t_{j+1}) - B_n(t_j)`, with `dB_{-n} = conj(dB_n)`.
    pub fn increment(&self, n: (i64, i64), j: usize) -> Result<Complex64> {
        if j >= self.steps {
            return Err(Error::InvalidArgument(format!(
                "step {j} beyond K = {}",
                self.steps
            )));
        }
        if self.lattice.index(n.0, n.1).is_none() || self.lattice.is_nyquist(n.0, n.1) {
            return Err(Error::ModeOutsideLattice(n.0, n.1));
        }
        let (c, flipped) = canonical_mode(n);
        let z = self.innovations(c, j)[0];
        let h = self.dt();
        let db = if c == (0, 0) {
            Complex64::new(h.sqrt() * z.re, 0.0)
        } else {
            z * (0.5 * h).sqrt()
        };
        Ok(if flipped { db.conj() } else { db })
    }
}

/// CSV dump `j,t,n1,n2,dRe,dIm` of the increments of `modes` over all steps.
pub fn write_path_csv<W: Write>(path: &NoisePath, modes: &[(i64, i64)], mut out: W) -> Result<()> {
    writeln!(out, "j,t,n1,n2,dRe,dIm")?;
    for j in 0..path.steps() {
        for &n in modes {
            let db = path.increment(n, j)?;
            writeln!(
                out,
                "{j},{:.16e},{},{},{:.16e},{:.16e}",
                path.time(j),
                n.0,
                n.1,
                db.re,
                db.im
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_symmetric() {
        let lat = FrequencyLattice::new(16).unwrap();
        let a = sample_path(7, lat, 1.0, 10).unwrap();
        let b = sample_path(7, lat, 1.0, 10).unwrap();
        for j in 0..10 {
            for n in [(0, 0), (1, 0), (-3, 2), (5, -7)] {
                let x = a.increment(n, j).unwrap();
                assert_eq!(x.re.to_bits(), b.increment(n, j).unwrap().re.to_bits());
                assert_eq!(a.increment((-n.0, -n.1), j).unwrap(), x.conj());
            }
            assert_eq!(a.increment((0, 0), j).unwrap().im, 0.0);
        }
        let c = sample_path(8, lat, 1.0, 10).unwrap();
        assert_ne!(
            a.increment((1, 0), 0).unwrap(),
            c.increment((1, 0), 0).unwrap()
        );
    }

    #[test]
    fn independent_of_lattice_size() {
        let a = sample_path(3, FrequencyLattice::new(16).unwrap(), 1.0, 4).unwrap();
        let b = sample_path(3, FrequencyLattice::new(64).unwrap(), 1.0, 4).unwrap();
        assert_eq!(
            a.increment((2, -5), 3).unwrap(),
            b.increment((2, -5), 3).unwrap()
        );
    }

    #[test]
    fn rejects_nyquist_and_bad_grid() {
        let lat = FrequencyLattice::new(16).unwrap();
        assert!(sample_path(0, lat, 1.0, 0).is_err());
        assert!(sample_path(0, lat, 0.0, 3).is_err());
        let p = sample_path(0, lat, 1.0, 3).unwrap();
        assert!(p.increment((-8, 0), 0).is_err());
        assert!(p.increment((0, 0), 3).is_err());
    }

    #[test]
    fn csv_dump() {
        let p = sample_path(1, FrequencyLattice::new(8).unwrap(), 0.5, 2).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &[(0, 0), (1, 2)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("0,0.0000000000000000e0,0,0,"));
    }
}
