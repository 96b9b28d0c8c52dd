use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("PAM order {0} is not a power of two in [2, 64]")]
    InvalidOrder(usize),

    #[error("bias {bias} is below the minimum {min} for a unipolar alphabet")]
    InvalidBias { bias: f64, min: f64 },

    #[error("shape parameter must be non-negative and finite, got {0}")]
    NegativeLambda(f64),

    #[error("distribution family {family} is not supported on a {polarity} alphabet")]
    UnsupportedFamily {
        family: &'static str,
        polarity: &'static str,
    },

    #[error("target entropy {target} bit is outside the achievable interval ({min}, {max}]")]
    UnreachableEntropy { target: f64, min: f64, max: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("sample count must be at least {min}, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("need at least {need} symbols for this filter span, got {got}")]
    TooFewSymbols { got: usize, need: usize },

    #[error("roll-off factor must lie in (0, 1], got {0}")]
    InvalidRollOff(f64),

    #[error("filter span must be an even number of symbols >= 8, got {0}")]
    InvalidSpan(usize),

    #[error("oversampling factor must be >= 2, got {0}")]
    InvalidOversampling(usize),

    #[error("pre-emphasis tilt must be non-negative and finite, got {0} dB")]
    NegativeTilt(f64),

    #[error("clip ratio must lie in (0, 0.1], got {0}")]
    InvalidClipRatio(f64),

    #[error("{have} samples cannot resolve clip ratio {clip_ratio}: need at least {need}")]
    InsufficientSamples {
        have: usize,
        need: usize,
        clip_ratio: f64,
    },

    #[error("source has zero average energy")]
    ZeroEnergy,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("inconsistent channel: {0}")]
    InconsistentChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "NGMI never crosses {target} on [{low_db}, {high_db}] dB (NGMI {low_ngmi:.4} .. {high_ngmi:.4})"
    )]
    NoCrossing {
        target: f64,
        low_db: f64,
        high_db: f64,
        low_ngmi: f64,
        high_ngmi: f64,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unknown scenario {0}, expected 1, 2 or 3")]
    InvalidScenario(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
