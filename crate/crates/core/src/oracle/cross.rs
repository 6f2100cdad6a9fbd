//! Quadrature counterparts of the closed-form engines. Each works from
//! pointwise Kraus operators and densities only, never from the analytic
//! moment formulas.

use num_complex::Complex64;

use super::quad::{integrate, pointer_breaks, quad_moment, QuadratureConfig};
use crate::error::Result;
use crate::kraus::{effect_at, kraus_at, MeasurementStage};
use crate::linalg::ComplexMatrix;
use crate::pointer::{GaussianPairSum, Pointer};
use crate::state::DensityMatrix;

/// Normalization, mean and variance of a density by quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadStats {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Moments of an arbitrary nonnegative density over the given partition.
pub fn quad_stats(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadStats> {
    cfg.validate()?;
    let m0 = quad_moment(&f, breaks, 0, cfg)?;
    let mean = quad_moment(&f, breaks, 1, cfg)? / m0;
    let variance = integrate(|x| (x - mean) * (x - mean) * f(x), breaks, cfg)? / m0;
    Ok(QuadStats {
        norm: m0,
        mean,
        variance,
    })
}

/// `int x^n psi(x-a) psi(x-a') dx` by quadrature.
pub fn quad_pair_moment(
    sigma: f64,
    a: f64,
    aprime: f64,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let p = Pointer::new(sigma)?;
    let breaks = pointer_breaks(&[a, aprime], sigma, cfg.pad);
    quad_moment(|x| p.amplitude(x, a) * p.amplitude(x, aprime), &breaks, n, cfg)
}

/// Moments of a pair sum evaluated pointwise.
pub fn quad_sum_stats(sum: &GaussianPairSum, cfg: &QuadratureConfig) -> Result<QuadStats> {
    let sigma = sum.common_sigma().ok_or(crate::error::Error::ZeroLikelihood)?;
    let centers: Vec<f64> = sum.terms().iter().map(|t| t.center_a).collect();
    let breaks = pointer_breaks(&centers, sigma, cfg.pad);
    quad_stats(|x| sum.eval(x), &breaks, cfg)
}

/// `int M_x rho M_x^H dx` entrywise.
pub fn quad_unread_update(
    rho: &DensityMatrix,
    stage: &MeasurementStage,
    cfg: &QuadratureConfig,
) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let breaks = pointer_breaks(&stage.observable.distinct_values(), stage.sigma(), cfg.pad);
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n);
    let entry = |x: f64, i: usize, j: usize| {
        let m = kraus_at(stage, x).matrix;
        (&(&m * rho.matrix()) * &m.adjoint())[(i, j)]
    };
    for i in 0..n {
        for j in 0..n {
            let re = integrate(|x| entry(x, i, j).re, &breaks, cfg)?;
            let im = integrate(|x| entry(x, i, j).im, &breaks, cfg)?;
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(out)
}

/// `(Var(x1), Var(x2))` by quadrature: `p(x1) = Tr[M rho0 M^H]` pointwise,
/// and `p(x2) = Tr[rho1 E(x2)]` with `rho1` itself integrated from the
/// first-stage Kraus operators.
pub fn quad_pointer_variances(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let b1 = pointer_breaks(&stage1.observable.distinct_values(), stage1.sigma(), cfg.pad);
    let p1 = |x: f64| {
        let m = kraus_at(stage1, x).matrix;
        (&(&m * rho0.matrix()) * &m.adjoint()).trace().re
    };
    let v1 = quad_stats(p1, &b1, cfg)?.variance;
    let rho1 = quad_unread_update(rho0, stage1, cfg)?;
    let b2 = pointer_breaks(&stage2.observable.distinct_values(), stage2.sigma(), cfg.pad);
    let p2 = |x: f64| rho1.trace_product(&effect_at(stage2, x).matrix).re;
    let v2 = quad_stats(p2, &b2, cfg)?.variance;
    Ok((v1, v2))
}
