use thiserror::Error;

pub type Result<T> = std::result::Result<T, GmsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GmsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error(
        "data are rank deficient (rank {rank} < dimension {dim}); \
         project onto the data span first (lossless reduction) or set a ridge parameter"
    )]
    RankDeficient { rank: usize, dim: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("every eigenvalue is below the kernel threshold; the kernel is degenerate")]
    DegenerateKernel,

    #[error("no eigenvalue is below the kernel threshold; the kernel is empty")]
    EmptyKernel,

    #[error("eigenvalue #{index} = {value:e} is not strictly positive")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error(
        "lambda bracket never attains kernel dimension {target} \
         (dimension {lo_dim} at lo, {hi_dim} at hi)"
    )]
    Bracket {
        target: usize,
        lo_dim: usize,
        hi_dim: usize,
    },

    #[error("unsupported problem size: {0}")]
    Capability(String),

    #[error("m-estimator diverged (condition number {0:e})")]
    Divergence(f64),

    #[error("restricted solve at deflation step {step} failed: {source}")]
    Deflation {
        step: usize,
        #[source]
        source: Box<GmsError>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl GmsError {
    /// Failures caused by the numbers rather than by how the call was made.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GmsError::Singular { .. }
                | GmsError::RankDeficient { .. }
                | GmsError::NonFinite(_)
                | GmsError::DegenerateKernel
                | GmsError::EmptyKernel
                | GmsError::NonPositiveEigenvalue { .. }
                | GmsError::Bracket { .. }
                | GmsError::Divergence(_)
                | GmsError::Deflation { .. }
                | GmsError::Precondition(_)
        )
    }
}
