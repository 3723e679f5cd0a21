use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no direction")]
    DegenerateDirection,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not block-unipotent for the given grading")]
    NotUnipotent,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("interval endpoints coincide")]
    DegenerateInterval,
    #[error("point {0} is not in the configuration")]
    UnknownPoint(String),
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("points {0} and {1} differ by a real number (horizontal pair)")]
    HorizontalPair(usize, usize),
    #[error("sign word has length {got}, expected {expected}")]
    WordLength { expected: usize, got: usize },
    #[error("direction is a Stokes direction")]
    StokesDirection,
    #[error("configuration is not in convex position")]
    NotConvex,
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("drag path crosses an event: {0}")]
    EventOnPath(String),
    #[error("object has no vanishing cycles")]
    EmptyObject,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
