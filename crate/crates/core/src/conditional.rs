//! Conditional measurement model: outcomes are recorded and statistics of one
//! pointer are conditioned on the other pointer's outcome.
//!
//! Forward: `p(x2 | x1)` is the Gaussian mixture over the eigenvalues of `B`
//! weighted by the normalized conditional state. Backward: `p(x1 | x2)` is
//! proportional to `Tr[M_x1 rho0 M_x1^H E(x2)]`, a pair sum over the
//! eigenvalues of `A` with kernel `Tr[P_a rho0 P_a' E(x2)]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::joint::post_first_state;
use crate::kraus::{check_dims, effect_at, kraus_at, MeasurementStage};
use crate::linalg::ComplexMatrix;
use crate::pointer::GaussianPairSum;
use crate::state::DensityMatrix;

/// Extracted variances in `[-CLAMP_TOL, 0)` are treated as roundoff.
pub const CLAMP_TOL: f64 = 1e-9;

const MIN_LIKELIHOOD: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Later outcome given the earlier one.
    Forward,
    /// Earlier outcome given the later one.
    Backward,
}

/// How the extracted system variance relates to the raw difference
/// `Var(x) - sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionFlag {
    /// Nonnegative; reported unchanged.
    Exact,
    /// Within roundoff below zero; reported as 0.
    Clamped,
    /// Genuinely below zero (postselection can narrow the pointer below its
    /// own width); reported unchanged.
    Anomalous,
}

/// Density of one pointer outcome given another, kept in closed form.
#[derive(Debug, Clone)]
pub struct ConditionalDensity {
    pub direction: Direction,
    pub conditioning: f64,
    /// Unnormalized density in the free variable.
    pub numerator: GaussianPairSum,
    pub normalization: f64,
    /// Width of the pointer whose outcome is free.
    pub free_sigma: f64,
}

impl ConditionalDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        self.numerator.eval(x) / self.normalization
    }

    pub fn stats(&self) -> Result<ConditionalStats> {
        ConditionalStats::from_sum(&self.numerator)
    }
}

/// Conditional mean and variance, and the system-level variance extracted by
/// subtracting the free pointer's shot noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalStats {
    pub mean: f64,
    pub variance: f64,
    pub extracted_system_variance: f64,
    pub flag: ExtractionFlag,
}

impl ConditionalStats {
    pub(crate) fn from_sum(sum: &GaussianPairSum) -> Result<Self> {
        let st = sum.stats()?;
        let (extracted, flag) = classify_extracted(st.excess_variance);
        Ok(Self {
            mean: st.mean,
            variance: st.variance.max(0.0),
            extracted_system_variance: extracted,
            flag,
        })
    }
}

pub(crate) fn classify_extracted(raw: f64) -> (f64, ExtractionFlag) {
    if raw >= 0.0 {
        (raw, ExtractionFlag::Exact)
    } else if raw >= -CLAMP_TOL {
        (0.0, ExtractionFlag::Clamped)
    } else {
        (raw, ExtractionFlag::Anomalous)
    }
}

/// `K rho K^H` with the Kraus weights divided by their maximum. Returns the
/// product and `ln` of the removed factor (already doubled).
pub(crate) fn scaled_update(
    rho: &ComplexMatrix,
    stage: &MeasurementStage,
    x: f64,
) -> (ComplexMatrix, f64) {
    let (k, log_scale) = stage.kraus_scaled(x);
    let out = &(&k * rho) * &k;
    (out.hermitian_part(), 2.0 * log_scale)
}

/// Kernel `C[a][a'] = Tr[P_a rho P_a' E]` over the groups of `stage`.
pub(crate) fn pair_kernel(
    rho: &ComplexMatrix,
    effect: &ComplexMatrix,
    stage: &MeasurementStage,
) -> Vec<Vec<Complex64>> {
    let groups = stage.observable.groups();
    let left: Vec<ComplexMatrix> = groups.iter().map(|g| &g.projector * rho).collect();
    let right: Vec<ComplexMatrix> = groups.iter().map(|g| &g.projector * effect).collect();
    let mut kernel = vec![vec![Complex64::new(0.0, 0.0); groups.len()]; groups.len()];
    for i in 0..groups.len() {
        for j in i..groups.len() {
            let v = left[i].trace_product(&right[j]);
            if i == j {
                kernel[i][i] = Complex64::new(v.re, 0.0);
            } else {
                kernel[i][j] = v;
                kernel[j][i] = v.conj();
            }
        }
    }
    kernel
}

/// `rho_bar1(x1) = M_x1 rho0 M_x1^H`, unnormalized; its trace is `p(x1)`.
pub fn conditional_state(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    x1: f64,
) -> Result<DensityMatrix> {
    check_dims(stage1.dim(), rho0.dim())?;
    let m = kraus_at(stage1, x1).matrix;
    Ok(DensityMatrix::from_trusted(&(&m * rho0.matrix()) * &m.adjoint()))
}

/// Normalized conditional state and `ln p(x1)`, finite for any finite `x1`.
pub fn conditional_state_normalized(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    x1: f64,
) -> Result<(DensityMatrix, f64)> {
    check_dims(stage1.dim(), rho0.dim())?;
    let (m, log_factor) = scaled_update(rho0.matrix(), stage1, x1);
    let t = m.trace().re;
    if !(t > MIN_LIKELIHOOD) {
        return Err(Error::ZeroLikelihood);
    }
    let rho = DensityMatrix::from_trusted(m.scale_real(1.0 / t));
    Ok((rho, t.ln() + log_factor - rho0.trace().ln()))
}

/// `p(x1) = Tr[M_x1 rho0 M_x1^H]`.
pub fn marginal_x1(rho0: &DensityMatrix, stage1: &MeasurementStage, x1: f64) -> Result<f64> {
    Ok(conditional_state(rho0, stage1, x1)?.trace())
}

/// `p(x2) = Tr[rho1 E(x2)]` with `rho1` the dephased state of the joint model.
pub fn marginal_x2(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x2: f64,
) -> Result<f64> {
    check_dims(stage1.dim(), stage2.dim())?;
    let rho1 = post_first_state(rho0, stage1)?;
    Ok(rho1.expect(&effect_at(stage2, x2).matrix).re)
}

/// `p(x2 | x1)`: mixture `sum_b <b|rho_hat1|b> psi2^2(x2 - b)`.
pub fn forward_density(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x1: f64,
) -> Result<ConditionalDensity> {
    check_dims(stage1.dim(), stage2.dim())?;
    let (rho_hat, _) = conditional_state_normalized(rho0, stage1, x1)?;
    let weights = stage2.observable.distribution(&rho_hat)?;
    let numerator = GaussianPairSum::mixture(
        &stage2.observable.distinct_values(),
        &weights,
        stage2.sigma(),
    )?;
    let normalization = numerator.sum_moment(0)?;
    if !(normalization > MIN_LIKELIHOOD) {
        return Err(Error::ZeroLikelihood);
    }
    Ok(ConditionalDensity {
        direction: Direction::Forward,
        conditioning: x1,
        numerator,
        normalization,
        free_sigma: stage2.sigma(),
    })
}

/// Mean and variance of `x2` given `x1`; extracted value is `Var(B|A)`.
pub fn forward_stats(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x1: f64,
) -> Result<ConditionalStats> {
    forward_density(rho0, stage1, stage2, x1)?.stats()
}

/// `p(x1 | x2)`: pair sum in `x1` with kernel `Tr[P_a rho0 P_a' E(x2)]`.
pub fn backward_density(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x2: f64,
) -> Result<ConditionalDensity> {
    check_dims(stage1.dim(), rho0.dim())?;
    check_dims(stage1.dim(), stage2.dim())?;
    // E(x2) up to a positive factor, which cancels in the normalization.
    let (effect, _) = scaled_update(&ComplexMatrix::identity(stage2.dim()), stage2, x2);
    let kernel = pair_kernel(rho0.matrix(), &effect, stage1);
    let numerator = GaussianPairSum::from_kernel(
        &stage1.observable.distinct_values(),
        &kernel,
        stage1.sigma(),
    )?;
    let normalization = numerator.sum_moment(0)?;
    if !(normalization > MIN_LIKELIHOOD) || !normalization.is_finite() {
        return Err(Error::ZeroLikelihood);
    }
    Ok(ConditionalDensity {
        direction: Direction::Backward,
        conditioning: x2,
        numerator,
        normalization,
        free_sigma: stage1.sigma(),
    })
}

/// Mean and variance of `x1` given `x2`; extracted value is `Var(A|B)`.
pub fn backward_stats(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x2: f64,
) -> Result<ConditionalStats> {
    backward_density(rho0, stage1, stage2, x2)?.stats()
}
