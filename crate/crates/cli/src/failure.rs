//! Exit-code contract of the command-line tool.

use std::fmt;

pub const EXIT_FEASIBLE: u8 = 0;
pub const EXIT_INFEASIBLE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_UNDECIDED: u8 = 4;
pub const EXIT_DIMENSION: u8 = 5;

/// Why a command could not produce its result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    /// Unreadable file, malformed JSON, schema violation or bad usage.
    Parse(String),
    /// Well-formed document describing an invalid object.
    Invalid(String),
    /// Matrices or documents of incompatible dimensions.
    Dimension(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) => EXIT_PARSE,
            Self::Invalid(_) => EXIT_INVALID,
            Self::Dimension(_) => EXIT_DIMENSION,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            Self::Parse(_) => "parse error",
            Self::Invalid(_) => "invalid",
            Self::Dimension(_) => "dimension mismatch",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Self::Parse(m) | Self::Invalid(m) | Self::Dimension(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category(), self.message())
    }
}

impl std::error::Error for Failure {}
