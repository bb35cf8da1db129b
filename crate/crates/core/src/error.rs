use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("m^p - 1 does not fit in 128 bits for m = {base}, p = {requested}; max safe period is {max_period}")]
    CapacityExceeded {
        base: u32,
        requested: u32,
        max_period: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sampling function: {0}")]
    InvalidSamplingFunction(String),

    #[error("backward digits are required for negative sites")]
    MissingDigits,

    #[error("need {needed} backward digits but only {available} were supplied")]
    InsufficientDigits { needed: usize, available: usize },

    #[error("singular values are not separated (relative gap {gap:.3e}); no contracted direction")]
    DegenerateSingularValues { gap: f64 },

    #[error("could not bracket band edges for orbit {orbit}: {detail}")]
    RootBracketingFailure { orbit: String, detail: String },

    #[error("no grid energy falls inside the gap ({lo}, {hi})")]
    EmptyGapGrid { lo: f64, hi: f64 },

    #[error("argument increment {increment:.4} at substep {substep} is too large to lift; raise substeps")]
    LiftingAmbiguity { substep: usize, increment: f64 },

    #[error("energy {energy} failed the dichotomy test; the stable section is undefined")]
    NotHyperbolic { energy: f64 },
}
