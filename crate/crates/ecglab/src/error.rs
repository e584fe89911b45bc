use thiserror::Error;

/// Errors produced by the geometry, measure and simulation layers.
#[derive(Debug, Error)]
pub enum EcgError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u32, u32),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("boundary prefix too short: need depth {need}, have {have}")]
    PrefixTooShort { need: usize, have: usize },

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("determinant must be 1, got {0}")]
    NotUnimodular(i64),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("pole: c*xi + d = 0, Radon-Nikodym derivative is infinite")]
    RnPole,

    #[error("point at infinity is not supported here")]
    InfinityNotSupported,

    #[error("tilted sampler acceptance collapsed: empirical rate {rate:.2e} after {proposals} proposals")]
    SamplerCollapse { rate: f64, proposals: u64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
