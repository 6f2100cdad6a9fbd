//! Joint measurement model: both probes interact, then both are read.
//!
//! The two-probe state is never built. Probe 1 sees the mixture
//! `sum_a <a|rho0|a> psi1^2(x - a)`; probe 2 sees the same form over the
//! eigenbasis of `B` with `rho0` replaced by the dephased state `rho1`.

use crate::error::Result;
use crate::kraus::{check_dims, MeasurementStage};
use crate::linalg::ComplexMatrix;
use crate::state::{variance_of, DensityMatrix, Observable};

/// Pointer statistics of the joint model.
#[derive(Debug, Clone)]
pub struct JointModelResult {
    pub rho1: DensityMatrix,
    pub mean_x1: f64,
    pub var_x1: f64,
    pub mean_x2: f64,
    pub var_x2: f64,
    pub var_a_rho0: f64,
    pub var_b_rho1: f64,
    pub var_b_rho0: f64,
}

fn require_normalized(rho: &DensityMatrix) -> Result<()> {
    if !rho.is_normalized() {
        return Err(crate::error::Error::NotNormalized { trace: rho.trace() });
    }
    Ok(())
}

/// `rho1 = sum_ij exp(-(a_i - a_j)^2 / (8 sigma1^2)) P_i rho0 P_j`.
pub fn post_first_state(rho0: &DensityMatrix, stage1: &MeasurementStage) -> Result<DensityMatrix> {
    check_dims(stage1.dim(), rho0.dim())?;
    require_normalized(rho0)?;
    let groups = stage1.observable.groups();
    let mut rho1 = ComplexMatrix::zeros(rho0.dim());
    for gi in groups {
        let left = &gi.projector * rho0.matrix();
        for gj in groups {
            let d = stage1.pointer.overlap(gi.value, gj.value);
            rho1 = &rho1 + &(&left * &gj.projector).scale_real(d);
        }
    }
    Ok(DensityMatrix::from_trusted(rho1))
}

/// `<x1> = Tr[A rho0]`; depends on nothing but the first stage.
pub fn pointer1_mean(rho0: &DensityMatrix, stage1: &MeasurementStage) -> Result<f64> {
    check_dims(stage1.dim(), rho0.dim())?;
    require_normalized(rho0)?;
    stage1.observable.mean(rho0)
}

/// `Var(x1) = sigma1^2 + Var(A)_rho0`.
pub fn pointer1_variance(rho0: &DensityMatrix, stage1: &MeasurementStage) -> Result<f64> {
    check_dims(stage1.dim(), rho0.dim())?;
    Ok(stage1.sigma().powi(2) + variance_of(&stage1.observable, rho0)?)
}

/// `Var(B)` in the state left behind by the first interaction.
pub fn backaction_variance(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    b: &Observable,
) -> Result<f64> {
    check_dims(stage1.dim(), b.dim())?;
    let rho1 = post_first_state(rho0, stage1)?;
    variance_of(b, &rho1)
}

/// `Var(x2) = sigma2^2 + Var(B)_rho1`.
pub fn pointer2_variance(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
) -> Result<f64> {
    check_dims(stage1.dim(), stage2.dim())?;
    Ok(stage2.sigma().powi(2) + backaction_variance(rho0, stage1, &stage2.observable)?)
}

/// All joint-model pointer statistics at once.
pub fn joint_model(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
) -> Result<JointModelResult> {
    check_dims(stage1.dim(), stage2.dim())?;
    let rho1 = post_first_state(rho0, stage1)?;
    let var_a_rho0 = variance_of(&stage1.observable, rho0)?;
    let var_b_rho1 = variance_of(&stage2.observable, &rho1)?;
    let var_b_rho0 = variance_of(&stage2.observable, rho0)?;
    Ok(JointModelResult {
        mean_x1: stage1.observable.mean(rho0)?,
        var_x1: stage1.sigma().powi(2) + var_a_rho0,
        mean_x2: stage2.observable.mean(&rho1)?,
        var_x2: stage2.sigma().powi(2) + var_b_rho1,
        rho1,
        var_a_rho0,
        var_b_rho1,
        var_b_rho0,
    })
}
