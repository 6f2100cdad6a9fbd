//! Density matrices, pure states and observables in spectral form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, group_degenerate, ComplexMatrix, TOL_HERM};

/// Default gap below which eigenvalues are merged into one spectral projector.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Trace tolerance for normalized states.
pub const TRACE_TOL: f64 = 1e-12;

/// Hermitian positive semidefinite matrix with its trace cached.
///
/// A normalized state has trace 1; conditional states produced by a Kraus
/// update are kept unnormalized and their trace is the outcome likelihood.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    trace: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity and positivity; the trace may be anything > 0.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermitian_deviation();
        let scale = matrix.max_abs().max(1.0);
        if deviation > TOL_HERM * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = matrix.hermitian_part();
        let e = eigh(&matrix)?;
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < PSD_TOL * scale {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let trace = matrix.trace().re;
        Ok(Self { matrix, trace })
    }

    /// Builds a normalized state, rejecting traces away from 1.
    pub fn normalized_from(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::new(matrix)?;
        if (rho.trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotNormalized { trace: rho.trace });
        }
        Ok(rho)
    }

    /// Internal constructor for matrices that are PSD by construction
    /// (Kraus updates of valid states). Only symmetrizes.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        Self { matrix, trace }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::from_trusted(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace - 1.0).abs() <= TRACE_TOL
    }

    /// Returns rho / Tr[rho].
    pub fn normalized(&self) -> Result<Self> {
        if !(self.trace > 0.0) || !self.trace.is_finite() {
            return Err(Error::ZeroLikelihood);
        }
        let matrix = self.matrix.scale_real(1.0 / self.trace);
        let trace = matrix.trace().re;
        Ok(Self { matrix, trace })
    }

    /// Tr[rho^2] / Tr[rho]^2.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re / (self.trace * self.trace)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix)?.values[0])
    }

    /// Dominant eigenvector of a (near) pure state.
    pub fn to_pure(&self) -> Result<PureState> {
        let purity = self.purity();
        if (purity - 1.0).abs() > 1e-9 {
            return Err(Error::NotPure { purity });
        }
        let e = eigh(&self.matrix)?;
        let n = self.dim();
        PureState::new(e.vectors.column(n - 1))
    }

    /// Tr[rho X].
    pub fn expect(&self, x: &ComplexMatrix) -> Complex64 {
        self.matrix.trace_product(x)
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalize(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnitNorm { norm: n });
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// <self|other>
    pub fn inner(&self, other: &PureState) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// <self|X|self>
    pub fn expect(&self, x: &ComplexMatrix) -> Complex64 {
        inner(&self.amplitudes, &x.mul_vec(&self.amplitudes))
    }

    pub fn up() -> Self {
        Self {
            amplitudes: vec![c(1.0, 0.0), c(0.0, 0.0)],
        }
    }

    pub fn down() -> Self {
        Self {
            amplitudes: vec![c(0.0, 0.0), c(1.0, 0.0)],
        }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: vec![c(h, 0.0), c(h, 0.0)],
        }
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: vec![c(h, 0.0), c(-h, 0.0)],
        }
    }
}

pub(crate) fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub(crate) fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// One distinct eigenvalue and its spectral projector.
#[derive(Debug, Clone)]
pub struct SpectralGroup {
    pub value: f64,
    pub projector: ComplexMatrix,
    /// Column indices into [`Observable::eigenvectors`].
    pub indices: Vec<usize>,
}

/// Hermitian operator held as spectral data.
#[derive(Debug, Clone)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    groups: Vec<SpectralGroup>,
}

impl Observable {
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        Self::from_matrix_with_tol(m, DEGENERACY_TOL)
    }

    pub fn from_matrix_with_tol(m: &ComplexMatrix, gap_tol: f64) -> Result<Self> {
        let e = eigh(m)?;
        Ok(Self::from_parts(e.values, e.vectors, gap_tol))
    }

    /// Builds from explicit eigenvalues and orthonormal eigenvector columns.
    pub fn from_spectrum(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        let n = eigenvectors.dim();
        if eigenvalues.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: eigenvalues.len(),
            });
        }
        if eigenvalues.iter().any(|v| !v.is_finite()) || !eigenvectors.is_finite() {
            return Err(Error::NonFinite);
        }
        let vhv = &eigenvectors.adjoint() * &eigenvectors;
        let dev = vhv.max_abs_diff(&ComplexMatrix::identity(n));
        if dev > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "eigenvectors are not orthonormal (deviation {dev:e})"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
        let mut vecs = ComplexMatrix::zeros(n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                vecs[(i, new_j)] = eigenvectors[(i, old_j)];
            }
        }
        let values = order.iter().map(|&i| eigenvalues[i]).collect();
        Ok(Self::from_parts(values, vecs, DEGENERACY_TOL))
    }

    fn from_parts(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix, gap_tol: f64) -> Self {
        let n = eigenvectors.dim();
        let groups = group_degenerate(&eigenvalues, gap_tol)
            .into_iter()
            .map(|indices| {
                let mut projector = ComplexMatrix::zeros(n);
                for &j in &indices {
                    let col = eigenvectors.column(j);
                    projector = &projector + &ComplexMatrix::outer(&col, &col);
                }
                let value =
                    indices.iter().map(|&j| eigenvalues[j]).sum::<f64>() / indices.len() as f64;
                SpectralGroup {
                    value,
                    projector,
                    indices,
                }
            })
            .collect();
        Self {
            eigenvalues,
            eigenvectors,
            groups,
        }
    }

    /// Spin-1/2 S_z = sigma_z / 2.
    pub fn spin_z() -> Self {
        Self::from_matrix(&ComplexMatrix::from_diag(&[0.5, -0.5])).expect("S_z is Hermitian")
    }

    /// Spin-1/2 S_x = sigma_x / 2.
    pub fn spin_x() -> Self {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        Self::from_matrix(&m).expect("S_x is Hermitian")
    }

    /// Spin-1/2 S_y = sigma_y / 2.
    pub fn spin_y() -> Self {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -0.5)],
            vec![c(0.0, 0.5), c(0.0, 0.0)],
        ])
        .unwrap();
        Self::from_matrix(&m).expect("S_y is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn groups(&self) -> &[SpectralGroup] {
        &self.groups
    }

    /// Distinct eigenvalues, ascending.
    pub fn distinct_values(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.value).collect()
    }

    /// Sum_i a_i P_i.
    pub fn matrix(&self) -> ComplexMatrix {
        self.spectral_function(|a| a)
    }

    /// Sum_i f(a_i) P_i.
    pub fn spectral_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for g in &self.groups {
            m = &m + &g.projector.scale_real(f(g.value));
        }
        m
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }

    /// Probabilities Tr[P_i rho] / Tr[rho] of each distinct eigenvalue.
    pub fn distribution(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.check_dim(rho.dim())?;
        Ok(self
            .groups
            .iter()
            .map(|g| rho.expect(&g.projector).re / rho.trace())
            .collect())
    }

    pub fn mean(&self, rho: &DensityMatrix) -> Result<f64> {
        let p = self.distribution(rho)?;
        Ok(self.groups.iter().zip(&p).map(|(g, w)| g.value * w).sum())
    }
}

/// Var(A)_rho = Tr[A^2 rho] - Tr[A rho]^2 for a normalized state.
pub fn variance_of(obs: &Observable, rho: &DensityMatrix) -> Result<f64> {
    if obs.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: rho.dim(),
        });
    }
    if !rho.is_normalized() {
        return Err(Error::NotNormalized { trace: rho.trace() });
    }
    let p = obs.distribution(rho)?;
    let mean: f64 = obs.groups().iter().zip(&p).map(|(g, w)| g.value * w).sum();
    // Centered second moment: avoids cancellation for large eigenvalues.
    let var: f64 = obs
        .groups()
        .iter()
        .zip(&p)
        .map(|(g, w)| (g.value - mean).powi(2) * w)
        .sum();
    Ok(var.max(0.0))
}

/// Variance of an observable in a pure state.
pub fn variance_in_pure(a: &ComplexMatrix, psi: &PureState) -> f64 {
    let mean = psi.expect(a).re;
    let a2 = a * a;
    (psi.expect(&a2).re - mean * mean).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityMatrix {
        DensityMatrix::from_pure(&PureState::plus())
    }

    #[test]
    fn spin_variances_on_plus() {
        assert!((variance_of(&Observable::spin_z(), &plus()).unwrap() - 0.25).abs() < 1e-15);
        assert!(variance_of(&Observable::spin_x(), &plus()).unwrap().abs() < 1e-15);
        let up = DensityMatrix::from_pure(&PureState::up());
        assert_eq!(variance_of(&Observable::spin_z(), &up).unwrap(), 0.0);
    }

    #[test]
    fn variance_rejects_mismatch_and_unnormalized() {
        let rho3 = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            variance_of(&Observable::spin_z(), &rho3),
            Err(Error::DimensionMismatch { .. })
        ));
        let half = DensityMatrix::new(ComplexMatrix::identity(2).scale_real(0.25)).unwrap();
        assert!(matches!(
            variance_of(&Observable::spin_z(), &half),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn observable_projectors_are_complete() {
        let m = ComplexMatrix::from_diag(&[1.0, 1.0, 2.0]);
        let obs = Observable::from_matrix(&m).unwrap();
        assert_eq!(obs.groups().len(), 2);
        let mut sum = ComplexMatrix::zeros(3);
        for g in obs.groups() {
            let p2 = &g.projector * &g.projector;
            assert!(p2.max_abs_diff(&g.projector) < 1e-10);
            sum = &sum + &g.projector;
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
        assert!(obs.matrix().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn density_matrix_validation() {
        let bad = ComplexMatrix::from_diag(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(bad), Err(Error::NotPositive { .. })));
        let nonherm = ComplexMatrix::from_real_rows(&[vec![0.5, 0.1], vec![0.0, 0.5]]).unwrap();
        assert!(matches!(DensityMatrix::new(nonherm), Err(Error::NotHermitian { .. })));
        let unnorm = ComplexMatrix::from_diag(&[0.5, 0.25]);
        assert!(matches!(
            DensityMatrix::normalized_from(unnorm),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn pure_state_roundtrip() {
        let psi = plus().to_pure().unwrap();
        assert!((psi.inner(&PureState::plus()).norm() - 1.0).abs() < 1e-12);
        assert!(matches!(
            DensityMatrix::maximally_mixed(2).to_pure(),
            Err(Error::NotPure { .. })
        ));
    }
}
