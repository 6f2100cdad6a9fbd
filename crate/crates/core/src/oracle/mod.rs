//! Independent verification paths: numerical quadrature over pointer
//! outcomes and Monte Carlo sampling of measurement records.

pub mod cross;
pub mod mc;
pub mod quad;

pub use mc::{
    mc_conditional_variance, sample_chain, variance_with_jackknife, McEstimate, OutcomeSamples,
    SampleMethod, SamplerConfig, RNG_ALGORITHM,
};
pub use cross::{
    quad_pair_moment, quad_pointer_variances, quad_stats, quad_sum_stats, quad_unread_update,
    QuadStats,
};
pub use quad::{integrate, pointer_breaks, quad_moment, QuadratureConfig};
