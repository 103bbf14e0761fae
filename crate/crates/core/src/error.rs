use crate::parse::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    /// `component` is 1-based.
    #[error("component {component} has a nonzero constant term")]
    NonzeroConstant { component: usize },
    #[error("matrix is singular at the origin")]
    Singular,
    #[error("germ has corank {0} at the origin; only corank one is supported")]
    NotCorankOne(usize),
    #[error("truncation order {have} is too low; at least {need} is required")]
    Truncation { have: u32, need: u32 },
    #[error("a pi-rotation needs an even number of indices, got {0}")]
    OddRotation(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("frame error: {0}")]
    Frame(String),
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
