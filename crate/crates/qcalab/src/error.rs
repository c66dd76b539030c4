use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum QcaError {
    #[error("operator support {support:?} is not contained in target region {target:?}")]
    RegionMismatch { support: Vec<usize>, target: Vec<usize> },

    #[error("operator has zero norm")]
    ZeroOperator,

    #[error("dimension {dim} exceeds the configured cap {cap} ({context})")]
    DimensionCap { dim: usize, cap: usize, context: String },

    #[error("degenerate spectrum while splitting a central element (gap {gap:.3e} below tolerance after {retries} retries)")]
    DegenerateSpectrum { gap: f64, retries: usize },

    #[error("map is not a *-automorphism of the algebra (residual {residual:.3e})")]
    NotAnAutomorphism { residual: f64 },

    #[error("epsilon {eps:.3e} exceeds the admissible threshold {max:.3e}")]
    EpsilonTooLarge { eps: f64, max: f64 },

    #[error("intertwiner y is numerically singular (smallest singular value {sigma_min:.3e})")]
    SingularY { sigma_min: f64 },

    #[error("spectrum of the twirled projection does not split into [-eps,eps] u [1-eps,1] (offending value {value:.3e})")]
    SpectralGapFailure { value: f64 },

    #[error("blocks within one circuit layer overlap at site {site}")]
    OverlapInLayer { site: usize },

    #[error("nonzero shift requires a periodic chain")]
    OpenChainUnsupported,

    #[error("support-algebra factorization failed: dim L ({dim_l}) x dim R ({dim_r}) != dim C ({dim_c})")]
    FactorizationFailure { dim_l: usize, dim_r: usize, dim_c: usize },

    #[error("operation requires rounded index 0, got {index}")]
    NonzeroIndex { index: f64 },

    #[error("indices do not match: {left} vs {right}")]
    IndexMismatch { left: f64, right: f64 },

    #[error("window {window} does not fit on the chain without self-overlap")]
    WindowTooLarge { window: usize },

    #[error("chain specifications do not match: {0}")]
    SpecMismatch(String),

    #[error("matrix logarithm branch failure: eigenvalue within {margin:.3e} of -1")]
    LogBranchFailure { margin: f64 },

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, QcaError>;
