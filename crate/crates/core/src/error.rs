use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("beam splitter angle {0} outside [0, pi/2]")]
    AngleOutOfRange(f64),
    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },
    #[error("two-mode gate needs distinct modes, got mode {0} twice")]
    SameMode(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("Walsh-Hadamard order {0} overflows index arithmetic")]
    OrderTooLarge(u32),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("phase {0} outside [0, pi/2]")]
    PhaseOutOfRange(f64),
    #[error("probability {0} outside (0, 1]")]
    InvalidProbability(f64),
    #[error("invalid noise model: {0}")]
    InvalidNoise(&'static str),
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("K = {k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("label {label} outside class set of size {classes}")]
    UnknownLabel { label: usize, classes: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
