//! Sequential indirect measurements of a finite-dimensional quantum system
//! by Gaussian pointers.
//!
//! Each stage couples an observable to a pointer of width `sigma`; reading
//! the pointer applies the Kraus operator `M_x = sum_a psi(x - a) P_a`.
//! Every outcome density the crate produces is a finite sum of Gaussian
//! amplitude pairs ([`GaussianPairSum`]), so normalizations, means and
//! variances are evaluated in closed form. Adaptive quadrature and Monte
//! Carlo sampling ([`oracle`]) provide independent checks.

// `!(x > y)` comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod conditional;
pub mod error;
pub mod joint;
pub mod kraus;
pub mod linalg;
pub mod mpur;
pub mod oracle;
pub mod pointer;
pub mod spin;
pub mod state;
pub mod random;
pub mod validate;

pub use chain::{
    chain_state, conditional_density_k, conditional_stats_k, effect_chain, ChainQuery,
    ChainResult, MeasurementChain,
};
pub use conditional::{
    backward_density, backward_stats, conditional_state, conditional_state_normalized,
    forward_density, forward_stats, marginal_x1, marginal_x2, ConditionalDensity,
    ConditionalStats, Direction, ExtractionFlag,
};
pub use error::{Error, Result};
pub use joint::{joint_model, JointModelResult};
pub use kraus::{effect_at, kraus_at, EffectOperator, KrausOperator, MeasurementStage};
pub use linalg::ComplexMatrix;
pub use mpur::{conditional_mpur_sum, mpur_check, ConditionalMpur, MpurReport, Sign};
pub use pointer::{GaussianPairSum, GaussianPairTerm, Pointer, SumStats};
pub use state::{DensityMatrix, Observable, PureState};

pub use num_complex::Complex64;
