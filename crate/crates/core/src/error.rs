use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("autoregressive polynomial is not causal (smallest root modulus {0:.6})")]
    NonCausal(f64),

    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),

    #[error("lag q must be at least 1")]
    BadLag,

    #[error("window length N={n} does not divide T={t}")]
    NonDivisible { t: usize, n: usize },

    #[error("N must be even and at least 4, got {0}")]
    BadWindow(usize),

    #[error("need at least two blocks, got M={0}")]
    TooFewBlocks(usize),

    #[error("length mismatch: series has {series} observations, grid expects {grid}")]
    LengthMismatch { series: usize, grid: usize },

    #[error("index {index} outside 1..={len}")]
    OutOfRange { index: usize, len: usize },

    #[error("series is degenerate (zero sample variance)")]
    DegenerateSeries,

    #[error("invalid order range p_min={p_min}, p_max={p_max} for T={t}")]
    BadOrderRange { p_min: usize, p_max: usize, t: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("run {run} (seed {seed:#018x}) failed: {source}")]
    RunFailed {
        run: usize,
        seed: u64,
        source: Box<Error>,
    },
}
