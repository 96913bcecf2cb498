use std::fmt;

use thiserror::Error;

/// A single broken confusion-matrix invariant.
///
/// Indices are stored 0-based; `Display` renders them 1-based for humans.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NotSquare { row: usize, len: usize, expected: usize },
    NonFinite { row: usize, col: usize },
    NegativeEntry { row: usize, col: usize, value: f64 },
    NotNormalized { sum: f64 },
    NotMapConsistent { column: usize, row: usize, off_diagonal: f64, diagonal: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "matrix has no rows"),
            Violation::NotSquare { row, len, expected } => {
                write!(f, "row {} has {} entries, expected {}", row + 1, len, expected)
            }
            Violation::NonFinite { row, col } => {
                write!(f, "entry ({}, {}) is not a finite number", row + 1, col + 1)
            }
            Violation::NegativeEntry { row, col, value } => {
                write!(f, "entry ({}, {}) is negative: {}", row + 1, col + 1, value)
            }
            Violation::NotNormalized { sum } => {
                write!(f, "entries sum to {sum}, expected 1")
            }
            Violation::NotMapConsistent { column, row, off_diagonal, diagonal } => write!(
                f,
                "decode column {}: p(x={}, x\u{302}={}) = {} exceeds the diagonal {}",
                column + 1,
                row + 1,
                column + 1,
                off_diagonal,
                diagonal
            ),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("error probability {0} is outside [0, 1)")]
    Domain(f64),

    #[error("invalid confusion matrix: {}", join_violations(.0))]
    InvalidConfusion(Vec<Violation>),

    #[error("decode {} has zero probability", .xhat + 1)]
    ZeroProbabilityDecode { xhat: usize },

    #[error("column {} of fiber {} is not flat", .index + 1, .xhat + 1)]
    NotFlat { xhat: usize, index: usize },

    #[error("fiber {} did not settle within {cap} balancing steps", .xhat + 1)]
    IterationCapExceeded { xhat: usize, cap: usize },

    #[error("maximum probability {p_max} is infeasible on {n} points")]
    InfeasibleMax { p_max: f64, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bound violated by channel with seed {seed} (slack {slack:e})")]
    ViolationFound { seed: u64, slack: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input contains no samples")]
    EmptyInput,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
