use thiserror::Error;

/// Errors raised by the geometry kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("signature mismatch: {0} vs {1}")]
    SignatureMismatch(String, String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate subspace")]
    DegenerateSubspace,

    #[error("null complement")]
    NullComplement,

    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),

    #[error("invalid initial frame: {0}")]
    InvalidFrame(String),

    #[error("degenerate curvature: k{index} vanishes near s = {s}")]
    DegenerateCurvature { index: usize, s: f64 },

    #[error("invalid curvature profile: {0}")]
    InvalidProfile(String),

    #[error("not null: curve velocity has <A,A> = {0:e}")]
    NotNull(f64),

    #[error("order < 3: covariant derivative of the tangent is null")]
    OrderTooLow,

    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("parameter s = {0} outside the solved span")]
    OutOfSpan(f64),

    #[error("not in H³₁: Re(kappa) = {0}")]
    NotInAntiDeSitter(f64),

    #[error("focal degeneration at u = {0}")]
    FocalDegeneration(f64),

    #[error("u = {u} outside the admissible interval ({lower}, {upper})")]
    Inadmissible { u: f64, lower: f64, upper: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("metric degenerate at p = {0:?}")]
    MetricDegenerate(Vec<f64>),

    #[error("null normal candidate at p = {0:?}")]
    NullNormal(Vec<f64>),

    #[error("decomposition undefined: k2^2 = 1")]
    DecompositionUndefined,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
