//! N-stage sequential measurement chains.
//!
//! With every outcome but `x_k` fixed, the joint likelihood is
//! `Tr[rho_bar_k E]` where `rho_bar_k = Omega_k rho_bar_{k-1} Omega_k^H` and
//! `E = Omega_{k+1}^H ... Omega_N^H Omega_N ... Omega_{k+1}`. Expanding
//! `Omega_k` over its spectral projectors turns the likelihood into a
//! Gaussian pair sum in `x_k` with kernel `Tr[P_a rho_bar_{k-1} P_a' E]`.
//! Constant factors from the fixed stages are divided out as they
//! accumulate, so far-from-peak outcomes never underflow.

use crate::conditional::{classify_extracted, pair_kernel, scaled_update, ExtractionFlag};
use crate::error::{Error, Result};
use crate::kraus::{kraus_at, EffectOperator, MeasurementStage};
use crate::linalg::ComplexMatrix;
use crate::pointer::GaussianPairSum;
use crate::state::DensityMatrix;

/// Fixed outcomes further than this many pointer widths from every
/// eigenvalue of their stage are rejected.
pub const MAX_OUTCOME_SIGMAS: f64 = 12.0;

/// Ordered measurement stages acting on an initial state.
#[derive(Debug, Clone)]
pub struct MeasurementChain {
    stages: Vec<MeasurementStage>,
    initial: DensityMatrix,
}

impl MeasurementChain {
    pub fn new(stages: Vec<MeasurementStage>, initial: DensityMatrix) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidChain("a chain needs at least one stage".into()));
        }
        if !initial.is_normalized() {
            return Err(Error::NotNormalized {
                trace: initial.trace(),
            });
        }
        for (i, s) in stages.iter().enumerate() {
            if s.dim() != initial.dim() {
                return Err(Error::InvalidChain(format!(
                    "stage {} has dimension {}, initial state has {}",
                    i + 1,
                    s.dim(),
                    initial.dim()
                )));
            }
        }
        Ok(Self { stages, initial })
    }

    pub fn stages(&self) -> &[MeasurementStage] {
        &self.stages
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }
}

/// One free outcome (0-based stage index) and the fixed outcomes of all
/// other stages, in stage order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainQuery {
    free: usize,
    fixed: Vec<f64>,
}

impl ChainQuery {
    pub fn new(free: usize, fixed: Vec<f64>) -> Result<Self> {
        if let Some(x) = fixed.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidQuery(format!("fixed outcome {x} is not finite")));
        }
        Ok(Self { free, fixed })
    }

    pub fn free(&self) -> usize {
        self.free
    }

    pub fn fixed(&self) -> &[f64] {
        &self.fixed
    }

    /// Outcome of stage `j != free`.
    pub fn outcome(&self, j: usize) -> f64 {
        debug_assert_ne!(j, self.free);
        if j < self.free {
            self.fixed[j]
        } else {
            self.fixed[j - 1]
        }
    }

    /// Checks index range, outcome count, and that every fixed outcome lies
    /// within 12 pointer widths of an eigenvalue of its stage.
    pub fn validate(&self, chain: &MeasurementChain) -> Result<()> {
        let n = chain.len();
        if self.free >= n {
            return Err(Error::InvalidQuery(format!(
                "free stage {} is out of range for a {n}-stage chain",
                self.free + 1
            )));
        }
        if self.fixed.len() != n - 1 {
            return Err(Error::InvalidQuery(format!(
                "expected {} fixed outcomes, got {}",
                n - 1,
                self.fixed.len()
            )));
        }
        for j in (0..n).filter(|&j| j != self.free) {
            let x = self.outcome(j);
            if chain.stages[j].outcome_distance(x) > MAX_OUTCOME_SIGMAS {
                return Err(Error::OutcomeOutOfRange {
                    stage: j + 1,
                    outcome: x,
                });
            }
        }
        Ok(())
    }
}

/// Conditional density of the free outcome with its moments.
#[derive(Debug, Clone)]
pub struct ChainResult {
    pub density: GaussianPairSum,
    pub normalization: f64,
    pub mean: f64,
    pub variance: f64,
    pub extracted_variance: f64,
    pub flag: ExtractionFlag,
    pub free_sigma: f64,
}

impl ChainResult {
    pub fn pdf(&self, x: f64) -> f64 {
        self.density.eval(x) / self.normalization
    }
}

/// Unnormalized state after the first `outcomes.len()` stages.
pub fn chain_state(chain: &MeasurementChain, outcomes: &[f64]) -> Result<DensityMatrix> {
    if outcomes.len() > chain.len() {
        return Err(Error::InvalidQuery(format!(
            "{} outcomes for a {}-stage chain",
            outcomes.len(),
            chain.len()
        )));
    }
    let mut rho = chain.initial.matrix().clone();
    for (stage, &x) in chain.stages.iter().zip(outcomes) {
        let k = kraus_at(stage, x).matrix;
        rho = &(&k * &rho) * &k.adjoint();
    }
    Ok(DensityMatrix::from_trusted(rho))
}

/// Trace-normalized state after the given outcomes and `ln` of its trace.
pub fn chain_state_scaled(
    chain: &MeasurementChain,
    outcomes: &[f64],
) -> Result<(ComplexMatrix, f64)> {
    let mut rho = chain.initial.matrix().clone();
    let mut log_trace = 0.0;
    for (stage, &x) in chain.stages.iter().zip(outcomes) {
        let (next, log_factor) = scaled_update(&rho, stage, x);
        let t = next.trace().re;
        if !(t > 1e-280) {
            return Err(Error::ZeroLikelihood);
        }
        rho = next.scale_real(1.0 / t);
        log_trace += t.ln() + log_factor;
    }
    Ok((rho, log_trace))
}

/// `E = Omega_{k+1}^H ... Omega_N^H Omega_N ... Omega_{k+1}` for the stages
/// after index `k` (0-based) with outcomes `future`. Identity when `k` is the
/// last stage.
pub fn effect_chain(chain: &MeasurementChain, k: usize, future: &[f64]) -> Result<EffectOperator> {
    if k >= chain.len() || future.len() != chain.len() - k - 1 {
        return Err(Error::InvalidQuery(format!(
            "effect after stage {} needs {} outcomes, got {}",
            k + 1,
            chain.len().saturating_sub(k + 1),
            future.len()
        )));
    }
    let mut e = ComplexMatrix::identity(chain.dim());
    for (stage, &x) in chain.stages[k + 1..].iter().zip(future).rev() {
        let m = kraus_at(stage, x).matrix;
        e = &(&m.adjoint() * &e) * &m;
    }
    Ok(EffectOperator {
        matrix: e.hermitian_part(),
        outcomes: future.to_vec(),
    })
}

fn effect_chain_scaled(chain: &MeasurementChain, k: usize, future: &[f64]) -> ComplexMatrix {
    let mut e = ComplexMatrix::identity(chain.dim());
    for (stage, &x) in chain.stages[k + 1..].iter().zip(future).rev() {
        let (next, _) = scaled_update(&e, stage, x);
        let scale = next.max_abs();
        e = if scale > 0.0 { next.scale_real(1.0 / scale) } else { next };
    }
    e
}

/// Closed-form density of `x_k` given all other outcomes.
pub fn conditional_density_k(
    chain: &MeasurementChain,
    query: &ChainQuery,
) -> Result<(GaussianPairSum, f64)> {
    query.validate(chain)?;
    let k = query.free;
    let past: Vec<f64> = (0..k).map(|j| query.outcome(j)).collect();
    let future: Vec<f64> = (k + 1..chain.len()).map(|j| query.outcome(j)).collect();
    let (rho_prev, _) = chain_state_scaled(chain, &past)?;
    let effect = effect_chain_scaled(chain, k, &future);
    let stage = &chain.stages[k];
    let kernel = pair_kernel(&rho_prev, &effect, stage);
    let sum =
        GaussianPairSum::from_kernel(&stage.observable.distinct_values(), &kernel, stage.sigma())?;
    let normalization = sum.sum_moment(0)?;
    if !(normalization > 1e-280) || !normalization.is_finite() {
        return Err(Error::ZeroLikelihood);
    }
    Ok((sum, normalization))
}

/// Conditional mean, variance and extracted `Var(A_k | rest)`.
pub fn conditional_stats_k(chain: &MeasurementChain, query: &ChainQuery) -> Result<ChainResult> {
    let (density, normalization) = conditional_density_k(chain, query)?;
    let st = density.stats()?;
    let (extracted_variance, flag) = classify_extracted(st.excess_variance);
    Ok(ChainResult {
        density,
        normalization,
        mean: st.mean,
        variance: st.variance.max(0.0),
        extracted_variance,
        flag,
        free_sigma: chain.stages[query.free].sigma(),
    })
}
