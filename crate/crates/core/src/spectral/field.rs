use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::SmoothCutoff;
use super::fft::fft2;
use super::lattice::{bracket_sq, FrequencyLattice};
use crate::error::{Error, Result};

/// Which side of a sharp frequency projection to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

/// Fourier coefficients `f^(n)` of a field on the torus in the orthonormal
/// basis `e_n(x) = e^{i n.x} / (2 pi)`, so that `f(x) = sum_n f^(n) e_n(x)`.
///
/// Real-tagged fields keep `f^(-n) = conj f^(n)` and a zero Nyquist row.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: FrequencyLattice,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(lattice: FrequencyLattice, real: bool) -> Self {
        Self {
            coeffs: vec![Complex64::default(); lattice.len()],
            lattice,
            real,
        }
    }

    /// Builds a field from coefficients in FFT order. Real-tagged input is
    /// symmetrized.
    pub fn from_coeffs(
        lattice: FrequencyLattice,
        coeffs: Vec<Complex64>,
        real: bool,
    ) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                lattice.len(),
                coeffs.len()
            )));
        }
        let mut f = Self {
            lattice,
            coeffs,
            real,
        };
        if real {
            f.symmetrize();
        }
        Ok(f)
    }

    /// Field with a single mode `coeff * e_n` (complex-tagged).
    pub fn single_mode(lattice: FrequencyLattice, n: (i64, i64), coeff: Complex64) -> Result<Self> {
        let mut f = Self::zeros(lattice, false);
        let idx = lattice
            .index(n.0, n.1)
            .ok_or(Error::ModeOutsideLattice(n.0, n.1))?;
        f.coeffs[idx] = coeff;
        Ok(f)
    }

    /// Real field `coeff e_n + conj(coeff) e_{-n}`.
    pub fn real_mode(lattice: FrequencyLattice, n: (i64, i64), coeff: Complex64) -> Result<Self> {
        let mut f = Self::zeros(lattice, true);
        f.set(n, coeff)?;
        Ok(f)
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable coefficients; callers are responsible for Hermitian symmetry of
    /// real-tagged fields.
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, n: (i64, i64)) -> Complex64 {
        self.lattice
            .index(n.0, n.1)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Sets `f^(n)`; on real fields also sets `f^(-n)` to the conjugate.
    pub fn set(&mut self, n: (i64, i64), value: Complex64) -> Result<()> {
        let idx = self
            .lattice
            .index(n.0, n.1)
            .ok_or(Error::ModeOutsideLattice(n.0, n.1))?;
        if self.real {
            if self.lattice.is_nyquist(n.0, n.1) {
                return Err(Error::ModeOutsideLattice(n.0, n.1));
            }
            let mirror = self
                .lattice
                .index(-n.0, -n.1)
                .expect("non-Nyquist mode has a mirror");
            if mirror == idx {
                self.coeffs[idx] = Complex64::new(value.re, 0.0);
            } else {
                self.coeffs[idx] = value;
                self.coeffs[mirror] = value.conj();
            }
        } else {
            self.coeffs[idx] = value;
        }
        Ok(())
    }

    /// Projects onto Hermitian-symmetric coefficients and zeroes the Nyquist rows.
    pub fn symmetrize(&mut self) {
        let lat = self.lattice;
        let m = lat.size();
        let half = m / 2;
        for k1 in 0..m {
            for k2 in 0..m {
                let i = k1 * m + k2;
                if k1 == half || k2 == half {
                    self.coeffs[i] = Complex64::default();
                    continue;
                }
                let j = ((m - k1) % m) * m + (m - k2) % m;
                if j < i {
                    continue;
                }
                let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
                self.coeffs[i] = avg;
                self.coeffs[j] = avg.conj();
            }
        }
        self.real = true;
    }

    /// Largest deviation from Hermitian symmetry (including Nyquist entries).
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.lattice.size();
        let half = m / 2;
        let mut worst = 0.0f64;
        for k1 in 0..m {
            for k2 in 0..m {
                let i = k1 * m + k2;
                if k1 == half || k2 == half {
                    worst = worst.max(self.coeffs[i].norm());
                    continue;
                }
                let j = ((m - k1) % m) * m + (m - k2) % m;
                worst = worst.max((self.coeffs[i] - self.coeffs[j].conj()).norm());
            }
        }
        worst
    }

    /// Samples `f(x_j)` on the `M x M` grid.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft2(&mut buf, self.lattice.size(), true);
        let scale = 1.0 / TAU;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// Real samples; the imaginary parts of a real-tagged field vanish to
    /// round-off.
    pub fn to_physical_real(&self) -> Result<Vec<f64>> {
        if !self.real {
            return Err(Error::NotReal);
        }
        Ok(self.to_physical().into_iter().map(|v| v.re).collect())
    }

    pub fn from_physical(lattice: FrequencyLattice, values: &[Complex64]) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} grid values, got {}",
                lattice.len(),
                values.len()
            )));
        }
        let mut buf = values.to_vec();
        fft2(&mut buf, lattice.size(), false);
        let m = lattice.size() as f64;
        let scale = TAU / (m * m);
        buf.iter_mut().for_each(|v| *v *= scale);
        Ok(Self {
            lattice,
            coeffs: buf,
            real: false,
        })
    }

    pub fn from_physical_real(lattice: FrequencyLattice, values: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut f = Self::from_physical(lattice, &c)?;
        f.symmetrize();
        Ok(f)
    }

    /// Coefficient-wise map `f^(n) -> w(<n>^2) f^(n)` for a real multiplier.
    pub fn map_symbol(&self, mut w: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let (n1, n2) = self.lattice.mode(i);
            *c *= w(bracket_sq(n1, n2));
        }
        out
    }

    /// Smooth projection `P_N`: multiplies by `chi(<n>/N)`.
    pub fn project_smooth(&self, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        let chi = SmoothCutoff;
        Ok(self.map_symbol(|k2| chi.weight(k2, cutoff)))
    }

    /// Sharp projection onto `<n> <= (1 + theta) / (2 eps)` (low) or its
    /// complement (high).
    pub fn project_sharp(&self, eps: f64, side: Side, theta: f64) -> Result<Self> {
        if !(eps > 0.0) || !(theta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sharp projection needs eps > 0 and theta >= 0 (eps = {eps}, theta = {theta})"
            )));
        }
        let threshold = (1.0 + theta) / (2.0 * eps);
        let t2 = threshold * threshold;
        Ok(self.map_symbol(|k2| {
            let low = k2 <= t2;
            if low == (side == Side::Low) {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// `(sum_n <n>^{2s} |f^(n)|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let a = c.norm_sqr();
            if a == 0.0 {
                continue;
            }
            let (n1, n2) = self.lattice.mode(i);
            acc += bracket_sq(n1, n2).powf(s) * a;
        }
        acc.sqrt()
    }

    /// Largest `|n_j|` carrying a non-zero coefficient.
    pub fn support_radius(&self) -> usize {
        let mut r = 0i64;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::default() {
                let (n1, n2) = self.lattice.mode(i);
                r = r.max(n1.abs()).max(n2.abs());
            }
        }
        r as usize
    }

    /// Copies the coefficients onto another lattice. Fails if a non-zero
    /// coefficient has no slot there.
    pub fn embed(&self, target: &FrequencyLattice) -> Result<Self> {
        let mut out = Self::zeros(*target, self.real);
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let (n1, n2) = self.lattice.mode(i);
            let j = target
                .index(n1, n2)
                .ok_or(Error::ModeOutsideLattice(n1, n2))?;
            if self.real && target.is_nyquist(n1, n2) {
                return Err(Error::ModeOutsideLattice(n1, n2));
            }
            out.coeffs[j] = *c;
        }
        Ok(out)
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    fn zip(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.lattice.check_same(&other.lattice)?;
        Ok(Self {
            lattice: self.lattice,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| op(*a, *b))
                .collect(),
            real: self.real && other.real,
        })
    }
}

/// `F^{-1}` followed by `F`; identity up to round-off.
pub fn dft_roundtrip(field: &SpectralField) -> Result<SpectralField> {
    let phys = field.to_physical();
    let mut back = SpectralField::from_physical(*field.lattice(), &phys)?;
    if field.is_real() {
        back.symmetrize();
    }
    Ok(back)
}

/// Fourier coefficients of the pointwise product of the given fields.
///
/// The product is exact (no aliasing) when the support radii add up to less
/// than `M/2`; otherwise the lattice cannot hold the product and
/// [`Error::DealiasCapacity`] is returned.
pub fn dealiased_product(fields: &[&SpectralField]) -> Result<SpectralField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    let lattice = *first.lattice();
    let mut radius = 0usize;
    for f in fields {
        lattice.check_same(f.lattice())?;
        radius += f.support_radius();
    }
    if radius >= lattice.size() / 2 {
        return Err(Error::DealiasCapacity {
            degree: fields.len(),
            radius,
            m: lattice.size(),
        });
    }
    let mut acc = first.to_physical();
    for f in &fields[1..] {
        let p = f.to_physical();
        acc.iter_mut().zip(&p).for_each(|(a, b)| *a *= *b);
    }
    let mut out = SpectralField::from_physical(lattice, &acc)?;
    if fields.iter().all(|f| f.is_real()) {
        out.symmetrize();
    }
    Ok(out)
}


#[cfg(test)]
pub(crate) use tests::random_real;
