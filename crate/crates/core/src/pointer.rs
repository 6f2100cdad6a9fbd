//! Gaussian pointer wavefunctions and the closed-form algebra of their
//! amplitude pairs.
//!
//! A pointer of width `sigma` has the real amplitude
//! `psi(x) = (2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2))`, so `|psi|^2` is a
//! normal density with variance `sigma^2`. Every pointer-outcome integral in
//! the engines reduces to moments of products `psi(x - a) psi(x - a')`:
//!
//! ```text
//! int x^n psi(x - a) psi(x - a') dx = D * m_n,
//! D = exp(-(a - a')^2 / (8 sigma^2)),  mu = (a + a') / 2,
//! m_0 = 1,  m_1 = mu,  m_2 = mu^2 + sigma^2.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gaussian probe of width `sigma` (small = strong, large = weak).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pointer {
    sigma: f64,
}

impl Pointer {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidSigma { sigma });
        }
        Ok(Self { sigma })
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// psi(x - a).
    #[inline]
    pub fn amplitude(&self, x: f64, a: f64) -> f64 {
        self.log_amplitude(x, a).exp()
    }

    /// ln psi(x - a); finite for any finite arguments.
    #[inline]
    pub fn log_amplitude(&self, x: f64, a: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        -0.25 * (2.0 * PI * s2).ln() - (x - a) * (x - a) / (4.0 * s2)
    }

    /// Peak amplitude psi(0).
    pub fn peak(&self) -> f64 {
        self.amplitude(0.0, 0.0)
    }

    /// <psi(x - a') | psi(x - a)> = exp(-(a - a')^2 / (8 sigma^2)).
    #[inline]
    pub fn overlap(&self, a: f64, aprime: f64) -> f64 {
        let d = a - aprime;
        (-d * d / (8.0 * self.sigma * self.sigma)).exp()
    }

    /// int x^n psi(x - a) psi(x - a') dx for n in {0, 1, 2}.
    pub fn pair_moment(&self, a: f64, aprime: f64, n: u32) -> Result<f64> {
        let d = self.overlap(a, aprime);
        let mu = 0.5 * (a + aprime);
        match n {
            0 => Ok(d),
            1 => Ok(d * mu),
            2 => Ok(d * (mu * mu + self.sigma * self.sigma)),
            order => Err(Error::InvalidOrder { order }),
        }
    }
}

/// One weighted amplitude pair `coeff * psi(x - a) psi(x - a')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPairTerm {
    pub coeff: Complex64,
    pub center_a: f64,
    pub center_b: f64,
    pub sigma: f64,
}

impl GaussianPairTerm {
    fn pointer(&self) -> Pointer {
        Pointer { sigma: self.sigma }
    }
}

/// Finite sum of weighted Gaussian amplitude pairs over one real variable.
///
/// Sums built from Hermitian kernels are closed under conjugation, which
/// makes every moment real.
#[derive(Debug, Clone, Default)]
pub struct GaussianPairSum {
    terms: Vec<GaussianPairTerm>,
}

/// Normalization, mean and spread of a sum read as an (unnormalized) density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumStats {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
    /// `variance - sigma^2`, computed without subtracting `sigma^2`.
    pub excess_variance: f64,
}

const IMAG_TOL: f64 = 1e-8;

impl GaussianPairSum {
    /// Checks the conjugate-partner invariant.
    pub fn new(terms: Vec<GaussianPairTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.sigma > 0.0) || !t.sigma.is_finite() {
                return Err(Error::InvalidSigma { sigma: t.sigma });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let scale = terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max).max(1e-300);
        for t in &terms {
            let has_partner = terms.iter().any(|u| {
                u.center_a == t.center_b
                    && u.center_b == t.center_a
                    && u.sigma == t.sigma
                    && (u.coeff - t.coeff.conj()).norm() <= 1e-12 * scale
            });
            if !has_partner {
                return Err(Error::NonHermitianSum {
                    residue: t.coeff.im.abs(),
                });
            }
        }
        Ok(Self { terms })
    }

    /// Builds `sum_ij kernel[i][j] psi(x - c_i) psi(x - c_j)`. The kernel is
    /// expected to be Hermitian; exact zeros are dropped.
    pub fn from_kernel(centers: &[f64], kernel: &[Vec<Complex64>], sigma: f64) -> Result<Self> {
        Pointer::new(sigma)?;
        let mut terms = Vec::with_capacity(centers.len() * centers.len());
        for (i, &ci) in centers.iter().enumerate() {
            for (j, &cj) in centers.iter().enumerate() {
                let coeff = kernel[i][j];
                if coeff.re == 0.0 && coeff.im == 0.0 {
                    continue;
                }
                terms.push(GaussianPairTerm {
                    coeff,
                    center_a: ci,
                    center_b: cj,
                    sigma,
                });
            }
        }
        Self::new(terms)
    }

    /// Positive-weight Gaussian mixture `sum_i w_i psi^2(x - c_i)`.
    pub fn mixture(centers: &[f64], weights: &[f64], sigma: f64) -> Result<Self> {
        Pointer::new(sigma)?;
        let terms = centers
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&center, &w)| GaussianPairTerm {
                coeff: Complex64::new(w, 0.0),
                center_a: center,
                center_b: center,
                sigma,
            })
            .collect();
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[GaussianPairTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Width shared by all terms, if any.
    pub fn common_sigma(&self) -> Option<f64> {
        let first = self.terms.first()?.sigma;
        self.terms.iter().all(|t| t.sigma == first).then_some(first)
    }

    /// Pointwise value of the sum at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let p = t.pointer();
                (t.coeff * p.amplitude(x, t.center_a) * p.amplitude(x, t.center_b)).re
            })
            .sum()
    }

    fn complex_moment(&self, n: u32) -> Result<(Complex64, f64)> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for t in &self.terms {
            let m = t.pointer().pair_moment(t.center_a, t.center_b, n)?;
            acc += t.coeff * m;
            mag += (t.coeff * m).norm();
        }
        Ok((acc, mag))
    }

    /// Real part of `int x^n (sum) dx`; errors when the imaginary residue is
    /// not roundoff.
    pub fn sum_moment(&self, n: u32) -> Result<f64> {
        let (acc, mag) = self.complex_moment(n)?;
        let residue = acc.im.abs();
        if residue > IMAG_TOL * mag.max(1.0) {
            return Err(Error::NonHermitianSum { residue });
        }
        debug_assert!(residue <= 1e-10 * mag.max(1.0), "imaginary residue {residue:e}");
        Ok(acc.re)
    }

    /// Normalized mean and variance. The excess over `sigma^2` is accumulated
    /// from the pair centers directly, so it stays accurate when `sigma^2`
    /// dwarfs the spread of the centers.
    pub fn stats(&self) -> Result<SumStats> {
        let sigma = self.common_sigma().ok_or(Error::ZeroLikelihood)?;
        let norm = self.sum_moment(0)?;
        if !(norm > 1e-280) || !norm.is_finite() {
            return Err(Error::ZeroLikelihood);
        }
        let mean = self.sum_moment(1)? / norm;
        let mut centered = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for t in &self.terms {
            let d = t.pointer().overlap(t.center_a, t.center_b);
            let mu = 0.5 * (t.center_a + t.center_b) - mean;
            let v = t.coeff * d * mu * mu;
            centered += v;
            mag += v.norm();
        }
        if centered.im.abs() > IMAG_TOL * mag.max(norm) {
            return Err(Error::NonHermitianSum {
                residue: centered.im.abs(),
            });
        }
        let excess_variance = centered.re / norm;
        Ok(SumStats {
            norm,
            mean,
            variance: sigma * sigma + excess_variance,
            excess_variance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn amplitude_values() {
        let p = Pointer::new(1.0).unwrap();
        assert!((p.amplitude(0.0, 0.0) - 0.631_618_7).abs() < 1e-7);
        let p = Pointer::new(0.5).unwrap();
        assert!((p.amplitude(0.3, 0.3) - 0.893_243_8).abs() < 1e-7);
    }

    #[test]
    fn invalid_sigma() {
        assert!(Pointer::new(0.0).is_err());
        assert!(Pointer::new(-1.0).is_err());
        assert!(Pointer::new(f64::NAN).is_err());
        assert!(Pointer::new(f64::INFINITY).is_err());
    }

    #[test]
    fn overlap_values() {
        let p = Pointer::new(0.5).unwrap();
        assert_eq!(p.overlap(0.3, 0.3), 1.0);
        assert!((p.overlap(0.5, -0.5) - (-0.5f64).exp()).abs() < 1e-15);
        let weak = Pointer::new(1e6).unwrap();
        assert!((weak.overlap(0.5, -0.5) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pair_moment_values() {
        let p = Pointer::new(0.5).unwrap();
        assert!((p.pair_moment(0.5, 0.5, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.pair_moment(0.5, -0.5, 1).unwrap(), 0.0);
        assert!((p.pair_moment(0.5, -0.5, 2).unwrap() - 0.151_632_7).abs() < 1e-7);
        assert!(matches!(p.pair_moment(0.0, 0.0, 3), Err(Error::InvalidOrder { order: 3 })));
    }

    #[test]
    fn sum_moments() {
        let single = GaussianPairSum::mixture(&[0.0], &[1.0], 0.7).unwrap();
        assert!((single.sum_moment(0).unwrap() - 1.0).abs() < 1e-15);

        let spin = GaussianPairSum::mixture(&[0.5, -0.5], &[0.5, 0.5], 1.0).unwrap();
        assert!((spin.sum_moment(2).unwrap() - 1.25).abs() < 1e-15);

        let pair = GaussianPairSum::new(vec![
            GaussianPairTerm {
                coeff: cz(0.0, 1.0),
                center_a: 0.2,
                center_b: -0.3,
                sigma: 0.4,
            },
            GaussianPairTerm {
                coeff: cz(0.0, -1.0),
                center_a: -0.3,
                center_b: 0.2,
                sigma: 0.4,
            },
        ])
        .unwrap();
        assert!(pair.sum_moment(1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_missing_partner() {
        let r = GaussianPairSum::new(vec![GaussianPairTerm {
            coeff: cz(0.0, 1.0),
            center_a: 0.2,
            center_b: -0.3,
            sigma: 0.4,
        }]);
        assert!(matches!(r, Err(Error::NonHermitianSum { .. })));
    }

    #[test]
    fn stats_excess_matches_plain_difference() {
        let s = GaussianPairSum::mixture(&[0.5, -0.5], &[0.3, 0.7], 0.8).unwrap();
        let st = s.stats().unwrap();
        let m0 = s.sum_moment(0).unwrap();
        let m1 = s.sum_moment(1).unwrap() / m0;
        let m2 = s.sum_moment(2).unwrap() / m0;
        assert!((st.variance - (m2 - m1 * m1)).abs() < 1e-14);
        // mixture of +-1/2 with weights 0.3/0.7: variance 0.21 of centers
        assert!((st.excess_variance - 0.21).abs() < 1e-14);
    }

    #[test]
    fn huge_sigma_keeps_excess_precision() {
        let s = GaussianPairSum::mixture(&[0.5, -0.5], &[0.5, 0.5], 1e4).unwrap();
        let st = s.stats().unwrap();
        assert!((st.excess_variance - 0.25).abs() < 1e-15);
    }
}
