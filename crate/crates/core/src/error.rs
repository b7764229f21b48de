use thiserror::Error;

/// Errors raised by the core numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("raw inter-arrival masses are not normalizable (partial sum {partial_sum} at n = {n})")]
    NonNormalizable { partial_sum: f64, n: usize },
    #[error("raw masses sum to {sum}, expected a sub-probability (sum <= 1)")]
    NotSubProbability { sum: f64 },
    #[error("raw masses are all zero")]
    ZeroMass,
    #[error("kernel masses sum to {sum}, expected 1")]
    Unnormalized { sum: f64 },
    #[error("free energy vanishes at delta = {delta}; the grid must sit in the localized phase")]
    NotLocalized { delta: f64 },
    #[error("grid needs at least {required} points, got {got}")]
    GridTooSmall { required: usize, got: usize },
    #[error("system size {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("index {index} outside the admissible range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },
    #[error("partition tables come from different inputs")]
    TableMismatch,
    #[error("disorder sample has {got} charges, {needed} needed")]
    SampleTooShort { needed: usize, got: usize },
    #[error("operation only defined for gaussian disorder")]
    UnsupportedLaw,
    #[error("root finding failed: {0}")]
    Solver(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
