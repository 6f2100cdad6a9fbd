//! Maccone-Pati sum-of-variances bound and its conditional counterpart.
//!
//! ```text
//! Var(A) + Var(B) >= max(R_a, R_b)
//! R_a = +-i<[A,B]> + |<psi|A +- iB|psi_perp>|^2
//! R_b = 1/2 |<psi_perp_{A+B}|A+B|psi>|^2
//! ```

use num_complex::Complex64;

use crate::conditional::{backward_stats, forward_stats};
use crate::error::{Error, Result};
use crate::kraus::{check_dims, MeasurementStage};
use crate::linalg::{c, ComplexMatrix};
use crate::state::{inner, norm, variance_in_pure, DensityMatrix, Observable, PureState};

const ORTHO_TOL: f64 = 1e-10;
const DEGENERATE_VAR: f64 = 1e-12;

/// Sign in front of `i<[A,B]>` and of `iB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    /// Pick the sign that makes `+-i<[A,B]>` nonnegative.
    Auto,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus | Sign::Auto => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpurReport {
    pub lhs_sum: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub commutator_sign: Sign,
}

impl MpurReport {
    /// Whether the bound is attained within `tol`.
    pub fn saturated(&self, tol: f64) -> bool {
        (self.lhs_sum - self.bound).abs() <= tol
    }
}

/// Outcome of the conditional comparison for a two-stage configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMpur {
    /// `Var(A|B) + Var(B|A)`.
    pub sum: f64,
    pub var_a_given_b: f64,
    pub var_b_given_a: f64,
    /// `max(R_a, R_b)` of the unconditioned relation for the initial state.
    pub classical_bound: f64,
    pub below: bool,
}

/// `(A - <A>)|psi>` normalized.
pub fn orthogonal_state(psi: &PureState, a: &Observable) -> Result<PureState> {
    check_dims(a.dim(), psi.dim())?;
    orthogonal_from_matrix(psi, &a.matrix())
}

fn orthogonal_from_matrix(psi: &PureState, a: &ComplexMatrix) -> Result<PureState> {
    let mean = psi.expect(a).re;
    let variance = variance_in_pure(a, psi);
    if variance <= DEGENERATE_VAR {
        return Err(Error::DegenerateDirection { variance });
    }
    let av = a.mul_vec(psi.amplitudes());
    let v: Vec<Complex64> = av
        .iter()
        .zip(psi.amplitudes())
        .map(|(x, p)| x - p * mean)
        .collect();
    PureState::normalize(v)
}

/// `i<[A,B]>`, which is real for Hermitian `A`, `B`.
pub fn commutator_term(psi: &PureState, a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (c(0.0, 1.0) * psi.expect(&a.commutator(b))).re
}

/// `R_a` for a given orthogonal state and sign choice.
pub fn bound_ra(
    psi: &PureState,
    a: &Observable,
    b: &Observable,
    psi_perp: &PureState,
    sign: Sign,
) -> Result<(f64, Sign)> {
    check_dims(a.dim(), psi.dim())?;
    check_dims(b.dim(), psi.dim())?;
    check_dims(psi_perp.dim(), psi.dim())?;
    let overlap = psi.inner(psi_perp).norm();
    if overlap > ORTHO_TOL {
        return Err(Error::NotOrthogonal { overlap });
    }
    let (am, bm) = (a.matrix(), b.matrix());
    let comm = commutator_term(psi, &am, &bm);
    let sign = match sign {
        Sign::Auto if comm < 0.0 => Sign::Minus,
        Sign::Auto => Sign::Plus,
        s => s,
    };
    let s = sign.factor();
    let op = &am + &bm.scale(c(0.0, s));
    let amp = inner(psi.amplitudes(), &op.mul_vec(psi_perp.amplitudes()));
    Ok((s * comm + amp.norm_sqr(), sign))
}

/// `R_b` via the explicit state `|psi_perp_{A+B}>`; 0 when `psi` is an
/// eigenstate of `A + B`.
pub fn bound_rb(psi: &PureState, a: &Observable, b: &Observable) -> Result<f64> {
    check_dims(a.dim(), psi.dim())?;
    check_dims(b.dim(), psi.dim())?;
    let sum = &a.matrix() + &b.matrix();
    let perp = match orthogonal_from_matrix(psi, &sum) {
        Ok(p) => p,
        Err(Error::DegenerateDirection { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let amp = inner(perp.amplitudes(), &sum.mul_vec(psi.amplitudes()));
    Ok(0.5 * amp.norm_sqr())
}

/// Any unit vector orthogonal to `psi` (Gram-Schmidt on the standard basis).
fn any_orthogonal(psi: &PureState) -> Option<PureState> {
    let n = psi.dim();
    (0..n).find_map(|i| {
        let mut e = vec![c(0.0, 0.0); n];
        e[i] = c(1.0, 0.0);
        let proj = inner(psi.amplitudes(), &e);
        let v: Vec<Complex64> = e
            .iter()
            .zip(psi.amplitudes())
            .map(|(x, p)| x - p * proj)
            .collect();
        if norm(&v) > 1e-6 {
            PureState::normalize(v).ok()
        } else {
            None
        }
    })
}

/// Full check of `Var(A) + Var(B) >= max(R_a, R_b)`. The orthogonal state for
/// `R_a` is `(A - <A>)|psi>`, falling back to `(B - <B>)|psi>` and then to any
/// orthogonal vector when the state is an eigenstate.
pub fn mpur_check(psi: &PureState, a: &Observable, b: &Observable) -> Result<MpurReport> {
    check_dims(a.dim(), psi.dim())?;
    check_dims(b.dim(), psi.dim())?;
    let (am, bm) = (a.matrix(), b.matrix());
    let lhs_sum = variance_in_pure(&am, psi) + variance_in_pure(&bm, psi);
    let perp = orthogonal_state(psi, a)
        .or_else(|_| orthogonal_state(psi, b))
        .ok()
        .or_else(|| any_orthogonal(psi));
    let (r_a, commutator_sign) = match perp {
        Some(p) => bound_ra(psi, a, b, &p, Sign::Auto)?,
        None => (0.0, Sign::Plus),
    };
    let r_b = bound_rb(psi, a, b)?;
    let bound = r_a.max(r_b);
    Ok(MpurReport {
        lhs_sum,
        r_a,
        r_b,
        bound,
        satisfied: lhs_sum >= bound - 1e-10,
        commutator_sign,
    })
}

/// `Var(A|B) + Var(B|A)` from the conditional model against the
/// unconditioned bound of the (pure) initial state.
pub fn conditional_mpur_sum(
    rho0: &DensityMatrix,
    stage1: &MeasurementStage,
    stage2: &MeasurementStage,
    x1: f64,
    x2: f64,
) -> Result<ConditionalMpur> {
    let var_b_given_a = forward_stats(rho0, stage1, stage2, x1)?.extracted_system_variance;
    let var_a_given_b = backward_stats(rho0, stage1, stage2, x2)?.extracted_system_variance;
    let psi = rho0.to_pure()?;
    let report = mpur_check(&psi, &stage1.observable, &stage2.observable)?;
    let sum = var_a_given_b + var_b_given_a;
    Ok(ConditionalMpur {
        sum,
        var_a_given_b,
        var_b_given_a,
        classical_bound: report.bound,
        below: sum < report.bound,
    })
}
