//! Closed-form results for a spin-1/2 prepared in `|+>`, measured first in
//! `S_z` and then in `S_x`. These formulas are written out independently of
//! the generic engines and serve as their reference.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::chain::MeasurementChain;
use crate::kraus::MeasurementStage;
use crate::state::{DensityMatrix, Observable, PureState};

use std::f64::consts::PI;

/// State after the first (unread) interaction:
/// `1/2 [[1, e^{-1/(8 s1^2)}], [e^{-1/(8 s1^2)}, 1]]`.
pub fn rho1_closed(sigma1: f64) -> DensityMatrix {
    let off = 0.5 * (-1.0 / (8.0 * sigma1 * sigma1)).exp();
    let m = ComplexMatrix::from_real_rows(&[vec![0.5, off], vec![off, 0.5]])
        .expect("finite 2x2 matrix");
    DensityMatrix::from_trusted(m)
}

/// `Var(S_x)_rho1 = 1/4 (1 - e^{-1/(4 s1^2)})`.
pub fn var_sx_rho1_closed(sigma1: f64) -> f64 {
    0.25 * (1.0 - (-1.0 / (4.0 * sigma1 * sigma1)).exp())
}

/// Unnormalized conditional state after reading `x1` on the `S_z` pointer.
pub fn rhobar1_closed(sigma1: f64, x1: f64) -> DensityMatrix {
    let s2 = sigma1 * sigma1;
    let pre = 0.5 * (1.0 / (2.0 * PI * s2)).sqrt() * (-(x1 * x1 + 0.25) / (2.0 * s2)).exp();
    let u = x1 / (2.0 * s2);
    let m = ComplexMatrix::from_real_rows(&[
        vec![pre * u.exp(), pre],
        vec![pre, pre * (-u).exp()],
    ])
    .expect("finite 2x2 matrix");
    DensityMatrix::from_trusted(m)
}

/// `(E[x2|x1], E[x2^2|x1], Var(x2|x1))`.
pub fn cond_moments_closed(sigma1: f64, sigma2: f64, x1: f64) -> (f64, f64, f64) {
    let v = x1 / (sigma1 * sigma1);
    // e^{v/2} / (1 + e^{v}) written to stay finite for large |v|
    let mean = (-0.5 * v.abs()).exp() / (1.0 + (-v.abs()).exp());
    let second = 0.25 + sigma2 * sigma2;
    let variance = 0.25 * (x1 / (2.0 * sigma1 * sigma1)).tanh().powi(2) + sigma2 * sigma2;
    (mean, second, variance)
}

/// `Var(S_x|S_z) = 1/4 tanh^2(x1 / (2 s1^2))`.
pub fn var_sx_given_sz_closed(sigma1: f64, x1: f64) -> f64 {
    0.25 * (x1 / (2.0 * sigma1 * sigma1)).tanh().powi(2)
}

/// `Var(S_z|S_x) = 1/4 (s1 - 1) s2 / (s1 s2 - 2)` with
/// `s1 = 1 + e^{1/(8 sigma1^2)}`, `s2 = 1 + e^{x2/sigma2^2}`.
///
/// With `a = 1/(8 sigma1^2)` and `b = x2/sigma2^2` the denominator is
/// evaluated as `expm1(a) + e^b (1 + e^a)`, which avoids the cancellation in
/// `s1 s2 - 2` for a wide first pointer.
pub fn var_sz_given_sx_closed(sigma1: f64, sigma2: f64, x2: f64) -> Result<f64> {
    let a = 1.0 / (8.0 * sigma1 * sigma1);
    let b = x2 / (sigma2 * sigma2);
    let ea = a.exp();
    if ea.is_infinite() {
        // strong first stage: s1 dominates
        return Ok(0.25);
    }
    // scale numerator and denominator by e^{-b} when e^b would overflow
    let (num, denom) = if b > 0.0 {
        let ib = (-b).exp();
        (ea * (1.0 + ib), a.exp_m1() * ib + 1.0 + ea)
    } else {
        let eb = b.exp();
        (ea * (1.0 + eb), a.exp_m1() + eb * (1.0 + ea))
    };
    if !(denom > 0.0) {
        return Err(Error::DenominatorNonPositive { value: denom });
    }
    Ok(0.25 * num / denom)
}

/// `S_z -> S_x -> S_x -> S_z` on `|+>` with a common pointer width.
pub fn four_stage_chain(sigma: f64) -> Result<MeasurementChain> {
    let z = || MeasurementStage::new(Observable::spin_z(), sigma, "Sz");
    let x = || MeasurementStage::new(Observable::spin_x(), sigma, "Sx");
    MeasurementChain::new(vec![z()?, x()?, x()?, z()?], DensityMatrix::from_pure(&PureState::plus()))
}

/// `(R_a, R_b)` for `|+>`, `A = S_z`, `B = S_x`.
pub fn mpur_spin_constants() -> (f64, f64) {
    (0.25, 0.125)
}
