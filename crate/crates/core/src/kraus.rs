//! Kraus and effect operators of a Gaussian-pointer measurement stage.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::oracle::quad::{integrate, pointer_breaks, QuadratureConfig};
use crate::pointer::Pointer;
use crate::state::Observable;

/// An observable coupled to a pointer of a given width.
#[derive(Debug, Clone)]
pub struct MeasurementStage {
    pub observable: Observable,
    pub pointer: Pointer,
    pub label: String,
}

/// `M_x = sum_i psi(x - a_i) P_i` in the computational basis.
#[derive(Debug, Clone)]
pub struct KrausOperator {
    pub matrix: ComplexMatrix,
    pub outcome: f64,
}

/// `E = M^H M` (or a product of such factors along a chain).
#[derive(Debug, Clone)]
pub struct EffectOperator {
    pub matrix: ComplexMatrix,
    pub outcomes: Vec<f64>,
}

impl MeasurementStage {
    pub fn new(observable: Observable, sigma: f64, label: impl Into<String>) -> Result<Self> {
        Ok(Self {
            observable,
            pointer: Pointer::new(sigma)?,
            label: label.into(),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.pointer.sigma()
    }

    pub fn dim(&self) -> usize {
        self.observable.dim()
    }

    fn weighted_projectors(&self, weights: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for g in self.observable.groups() {
            let w = weights(g.value);
            if w != 0.0 {
                m = &m + &g.projector.scale_real(w);
            }
        }
        m
    }

    /// Largest ln psi(x - a_i) over the spectrum.
    pub(crate) fn max_log_amplitude(&self, x: f64) -> f64 {
        self.observable
            .groups()
            .iter()
            .map(|g| self.pointer.log_amplitude(x, g.value))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Kraus operator divided by its largest weight; returns the matrix and
    /// the natural log of the removed factor.
    pub fn kraus_scaled(&self, x: f64) -> (ComplexMatrix, f64) {
        let log_scale = self.max_log_amplitude(x);
        let m = self.weighted_projectors(|a| (self.pointer.log_amplitude(x, a) - log_scale).exp());
        (m, log_scale)
    }

    /// Distance of `x` from the nearest eigenvalue in pointer widths.
    pub fn outcome_distance(&self, x: f64) -> f64 {
        self.observable
            .groups()
            .iter()
            .map(|g| (x - g.value).abs())
            .fold(f64::INFINITY, f64::min)
            / self.sigma()
    }
}

/// `M_x = sum_i psi(x - a_i) P_i`.
pub fn kraus_at(stage: &MeasurementStage, x: f64) -> KrausOperator {
    KrausOperator {
        matrix: stage.weighted_projectors(|a| stage.pointer.amplitude(x, a)),
        outcome: x,
    }
}

/// `E(x) = sum_i psi(x - a_i)^2 P_i`.
pub fn effect_at(stage: &MeasurementStage, x: f64) -> EffectOperator {
    EffectOperator {
        matrix: stage.weighted_projectors(|a| stage.pointer.amplitude(x, a).powi(2)),
        outcomes: vec![x],
    }
}

/// `max |int M_x^H M_x dx - I|` by quadrature over the default padded domain.
pub fn completeness_defect(stage: &MeasurementStage, quad: &QuadratureConfig) -> Result<f64> {
    quad.validate()?;
    let breaks = pointer_breaks(&stage.observable.distinct_values(), stage.sigma(), quad.pad);
    completeness_defect_on(stage, &breaks, quad)
}

/// Completeness defect over an explicit partition (e.g. a truncated domain).
pub fn completeness_defect_on(
    stage: &MeasurementStage,
    breaks: &[f64],
    quad: &QuadratureConfig,
) -> Result<f64> {
    let n = stage.dim();
    let mut integral = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let entry = |x: f64| {
                let m = kraus_at(stage, x).matrix;
                (&m.adjoint() * &m)[(i, j)]
            };
            let re = integrate(|x| entry(x).re, breaks, quad)?;
            let im = integrate(|x| entry(x).im, breaks, quad)?;
            integral[(i, j)] = num_complex::Complex64::new(re, im);
        }
    }
    Ok(integral.max_abs_diff(&ComplexMatrix::identity(n)))
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
