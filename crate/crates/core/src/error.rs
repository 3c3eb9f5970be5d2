use thiserror::Error;

/// Errors raised by the lattice model, the decoders and the simulation harness.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("generator is rank deficient (|r[{index}][{index}]| = {value:e})")]
    RankDeficient { index: usize, value: f64 },

    #[error("generator is singular")]
    Singular,

    #[error("code generator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("exhaustive enumeration of {points} points exceeds the budget of {budget}")]
    EnumerationBudget { points: f64, budget: u64 },

    #[error("node visit budget of {0} exceeded")]
    VisitBudget(u64),

    #[error("stack memory cap of {0} nodes exceeded")]
    StackCapacity(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("candidate list is empty")]
    EmptyList,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown decoder `{0}`")]
    UnknownDecoder(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;
