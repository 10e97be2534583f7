use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    #[error("invalid position: {0}")]
    InvalidPosition(String),

    #[error("positions live on different probability spaces")]
    SpaceMismatch,

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("invalid scalar function: {0}")]
    InvalidFunction(String),

    #[error("root search diverged towards {direction}: no bracket within |m| <= {limit:e}")]
    Diverged { direction: Direction, limit: f64 },

    #[error("maximizer still at the edge of the search window after {widenings} widenings")]
    UnboundedSearch { widenings: usize },

    #[error("{0}")]
    Format(String),

    #[error("unknown fixture id `{0}`")]
    UnknownFixture(String),

    #[error("sampler contract violated: {0}")]
    Sampler(String),

    #[error("{0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::PlusInfinity => f.write_str("+inf"),
            Direction::MinusInfinity => f.write_str("-inf"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
