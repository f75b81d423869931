use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index label `{label}` occurs {count} times in one monomial")]
    IndexBalance { label: String, count: usize },

    #[error("free index mismatch in sum: {0}")]
    FreeMismatch(String),

    #[error("bound exceeded: order {got} is above the configured bound {bound}")]
    Capacity { got: usize, bound: usize },

    #[error("missing history entry r_{0}")]
    Sequencing(usize),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("insufficient jet degree: have {have}, need {need}")]
    JetDegree { have: usize, need: usize },

    #[error("no numeric value for {0}")]
    MissingValue(String),

    #[error("singular linear system in fit; resample")]
    Singular,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
