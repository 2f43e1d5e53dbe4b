use std::fmt;

use thiserror::Error;

/// Location of a syntax problem in `.lineq` input, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },

    #[error("variable index must be >= 1 at {position}")]
    VariableIndex { position: Position },

    #[error("coefficient overflow at {position}")]
    CoefficientOverflow { position: Position },

    #[error("equation on line {line} has all coefficients zero")]
    ZeroEquation { line: usize },

    #[error("input contains no equations")]
    NoEquations,

    #[error("{what} exceeds the supported limit of {limit}")]
    TooLarge { what: &'static str, limit: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("equation {index} is not balanced (coefficient sum {sum})")]
    Unbalanced { index: usize, sum: i128 },

    #[error("system is not irreducible")]
    Reducible,

    #[error("equation {index} is not dominant")]
    NotDominant { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration guard exceeded: about {estimate:.3e} tuples, limit {limit:.0e}")]
    GuardExceeded { estimate: f64, limit: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
