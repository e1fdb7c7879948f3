/// Smooth cutoff profile `chi`: identically 1 on `[0, 1]`, 0 on `[2, inf)`,
/// and the C-infinity transition
///
/// ```text
/// chi(r) = g(2 - r) / (g(2 - r) + g(r - 1)),   g(x) = exp(-1/x) for x > 0
/// ```
///
/// on `(1, 2)`, which is monotone non-increasing.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SmoothCutoff;

impl SmoothCutoff {
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let a = bump(2.0 - r);
            let b = bump(r - 1.0);
            a / (a + b)
        }
    }

    /// `chi_N(n) = chi(<n> / N)` given the squared bracket.
    #[inline]
    pub fn weight(&self, bracket_sq: f64, cutoff: f64) -> f64 {
        self.eval(bracket_sq.sqrt() / cutoff)
    }

    /// `chi_N(n) > 0` exactly when `<n> < 2N`.
    #[inline]
    pub fn in_support(&self, bracket_sq: f64, cutoff: f64) -> bool {
        bracket_sq < 4.0 * cutoff * cutoff
    }

    /// Largest `|n_j|` with `chi_N(n) > 0`.
    pub fn support_radius(&self, cutoff: f64) -> usize {
        let mut r = 0usize;
        while self.in_support(1.0 + ((r + 1) * (r + 1)) as f64, cutoff) {
            r += 1;
        }
        r
    }
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let chi = SmoothCutoff;
        assert_eq!(chi.eval(0.0), 1.0);
        assert_eq!(chi.eval(1.0), 1.0);
        assert_eq!(chi.eval(2.0), 0.0);
        assert_eq!(chi.eval(3.5), 0.0);
        assert!((chi.eval(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monotone_and_bounded() {
        let chi = SmoothCutoff;
        let mut prev = 1.0;
        for i in 0..=2000 {
            let r = 1.0 + i as f64 / 2000.0;
            let v = chi.eval(r);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn support_radius_matches_predicate() {
        let chi = SmoothCutoff;
        assert_eq!(chi.support_radius(8.0), 15);
        assert_eq!(chi.support_radius(32.0), 63);
        assert!(chi.in_support(1.0 + 63.0 * 63.0, 32.0));
        assert!(!chi.in_support(1.0 + 64.0 * 64.0, 32.0));
    }
}
