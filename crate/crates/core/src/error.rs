use thiserror::Error;

/// Domain and configuration errors shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must lie in (0, 1/e] (natural log convention), got {0}")]
    Epsilon(f64),

    #[error("{name} must be at least 1")]
    NotPositive { name: &'static str },

    #[error("{name} = {value} exceeds the supported maximum {max}")]
    TooLarge {
        name: &'static str,
        value: u64,
        max: u64,
    },

    #[error("checkpoint list is empty")]
    EmptySchedule,

    #[error("checkpoints must be strictly increasing: m_{index} = {next} does not exceed {prev}")]
    NotIncreasing { index: usize, prev: u64, next: u64 },

    #[error("checkpoint index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("m = {m} exceeds n = {n}")]
    MExceedsN { m: u64, n: u64 },

    #[error("x = {x} lies below m = {m}")]
    XBelowM { x: f64, m: u64 },

    #[error("largest checkpoint {largest} is smaller than set size n = {n}")]
    ScheduleTooSmall { largest: u64, n: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
