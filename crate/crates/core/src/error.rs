use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("point does not belong to the state space: {0}")]
    InvalidPoint(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("candidate balls do not cover sample point {index}")]
    NoCover { index: usize },

    #[error("cost never crosses the critical level after {expansions} bracket expansions")]
    UnboundedPressure { expansions: usize },

    #[error("degenerate fit window: {points} points, need at least {needed}")]
    DegenerateFit { points: usize, needed: usize },

    #[error("radius {0} is not a power of 1/2")]
    NonDyadicRadius(f64),

    #[error("measure gives mass {mass} to the target set, expected 1")]
    MeasureNotOnTarget { mass: f64 },

    #[error("linear program: {0}")]
    Lp(String),
}

pub type Result<T> = core::result::Result<T, Error>;
