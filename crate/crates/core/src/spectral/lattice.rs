use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Japanese bracket `sqrt(1 + n1^2 + n2^2)`.
pub fn bracket(n1: i64, n2: i64) -> f64 {
    bracket_sq(n1, n2).sqrt()
}

/// Squared bracket `1 + |n|^2`.
#[inline]
pub fn bracket_sq(n1: i64, n2: i64) -> f64 {
    (1 + n1 * n1 + n2 * n2) as f64
}

/// Square frequency lattice `{-M/2 <= n_j < M/2}` of an `M x M` grid on the
/// torus of side `2 pi`.
///
/// Coefficients are stored row-major in FFT order: axis slot `k` holds
/// frequency `k` for `k < M/2` and `k - M` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyLattice {
    m: usize,
}

impl FrequencyLattice {
    pub fn new(m: usize) -> Result<Self> {
        if m < 8 || m % 2 != 0 {
            return Err(Error::InvalidLattice(m));
        }
        Ok(Self { m })
    }

    /// Smallest power-of-two lattice (at least 8) on which every frequency with
    /// `|n_j| <= radius` is retained away from the Nyquist row.
    pub fn covering(radius: usize) -> Self {
        let mut m = 8;
        while radius >= m / 2 {
            m *= 2;
        }
        Self { m }
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.m
    }

    /// Total number of lattice points, `M^2`.
    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn freq(&self, slot: usize) -> i64 {
        let half = self.m / 2;
        if slot < half {
            slot as i64
        } else {
            slot as i64 - self.m as i64
        }
    }

    #[inline]
    pub fn slot(&self, n: i64) -> Option<usize> {
        let half = (self.m / 2) as i64;
        if n >= -half && n < half {
            Some(if n >= 0 {
                n as usize
            } else {
                (n + self.m as i64) as usize
            })
        } else {
            None
        }
    }

    #[inline]
    pub fn index(&self, n1: i64, n2: i64) -> Option<usize> {
        Some(self.slot(n1)? * self.m + self.slot(n2)?)
    }

    #[inline]
    pub fn mode(&self, index: usize) -> (i64, i64) {
        (self.freq(index / self.m), self.freq(index % self.m))
    }

    /// True on the rows `n_j = -M/2`, which have no partner `-n` on the lattice.
    #[inline]
    pub fn is_nyquist(&self, n1: i64, n2: i64) -> bool {
        let h = -((self.m / 2) as i64);
        n1 == h || n2 == h
    }

    pub fn modes(&self) -> impl Iterator<Item = (usize, (i64, i64))> + '_ {
        (0..self.len()).map(move |i| (i, self.mode(i)))
    }

    /// Largest bracket among retained non-Nyquist frequencies.
    pub fn max_bracket(&self) -> f64 {
        let r = (self.m / 2 - 1) as i64;
        bracket(r, r)
    }

    /// Physical grid point `x = 2 pi (j1, j2) / M`.
    pub fn grid_point(&self, j1: usize, j2: usize) -> (f64, f64) {
        let dx = std::f64::consts::TAU / self.m as f64;
        (j1 as f64 * dx, j2 as f64 * dx)
    }

    pub fn check_same(&self, other: &FrequencyLattice) -> Result<()> {
        if self.m != other.m {
            return Err(Error::LatticeMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_values() {
        assert_eq!(bracket(0, 0), 1.0);
        assert!((bracket(1, 0) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((bracket(3, 4) - 5.099_019_513_592_785).abs() < 1e-14);
    }

    #[test]
    fn slots_roundtrip() {
        let lat = FrequencyLattice::new(16).unwrap();
        for k in 0..16 {
            assert_eq!(lat.slot(lat.freq(k)), Some(k));
        }
        assert_eq!(lat.slot(8), None);
        assert_eq!(lat.slot(-8), Some(8));
        assert!(lat.is_nyquist(-8, 3));
        assert!(!lat.is_nyquist(7, -7));
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(FrequencyLattice::new(6).is_err());
        assert!(FrequencyLattice::new(9).is_err());
    }

    #[test]
    fn covering_lattice() {
        assert_eq!(FrequencyLattice::covering(3).size(), 8);
        assert_eq!(FrequencyLattice::covering(4).size(), 16);
        assert_eq!(FrequencyLattice::covering(255).size(), 512);
    }

    #[test]
    fn every_non_nyquist_mode_has_partner() {
        let lat = FrequencyLattice::new(12).unwrap();
        for (_, (n1, n2)) in lat.modes() {
            if !lat.is_nyquist(n1, n2) {
                assert!(lat.index(-n1, -n2).is_some());
            }
        }
    }
}
