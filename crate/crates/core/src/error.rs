use thiserror::Error;

/// Errors raised by the measurement engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("density matrix is not normalized (trace {trace})")]
    NotNormalized { trace: f64 },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("vector norm {norm} is not 1")]
    NotUnitNorm { norm: f64 },

    #[error("invalid pointer width {sigma}: must be finite and > 0")]
    InvalidSigma { sigma: f64 },

    #[error("moment order {order} is not supported (only 0, 1, 2)")]
    InvalidOrder { order: u32 },

    #[error("Gaussian pair sum has an imaginary moment residue {residue:e}")]
    NonHermitianSum { residue: f64 },

    #[error("conditioning outcome has vanishing likelihood")]
    ZeroLikelihood,

    #[error("outcome {outcome} of stage {stage} lies more than 12 sigma from every eigenvalue")]
    OutcomeOutOfRange { stage: usize, outcome: f64 },

    #[error("quadrature did not reach tolerance (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("rejection sampler stalled (acceptance rate {rate:e})")]
    RejectionStall { rate: f64 },

    #[error("direction (A - <A>)|psi> is degenerate: variance {variance:e}")]
    DegenerateDirection { variance: f64 },

    #[error("states are not orthogonal (overlap {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("closed form denominator s1*s2 - 2 = {value} is not positive")]
    DenominatorNonPositive { value: f64 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
