//! Error type shared by the tensor and mapping layers.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },

    #[error("contraction slots ({a_slot}, {b_slot}) do not have opposite variance")]
    VarianceMismatch { a_slot: usize, b_slot: usize },

    #[error("slots ({s1}, {s2}) are not a distinct pair of equal variance")]
    SlotPairMismatch { s1: usize, s2: usize },

    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid valence: expected {expected}, found {found}")]
    InvalidValence { expected: String, found: String },

    #[error("symmetry violation in {what}")]
    SymmetryViolation { what: String },

    #[error("invalid theta selector component {value} (must be 1 or 2)")]
    InvalidSelector { value: u8 },

    #[error("zero denominator in rational")]
    ZeroDenominator,

    #[error("malformed rational literal: {0:?}")]
    BadRationalLiteral(String),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
