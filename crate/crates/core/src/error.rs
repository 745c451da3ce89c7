use std::fmt;

use thiserror::Error;

/// Position in workload source text, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {at}: {message}")]
    Syntax { at: Span, message: String },
    #[error("duplicate identifier `{name}` at {at}")]
    Duplicate { name: String, at: Span },
    #[error("undeclared identifier `{name}` at {at}")]
    Undeclared { name: String, at: Span },
    #[error("assertion `{id}` at {at} has an impure predicate (contains an assignment)")]
    ImpureAssertion { id: String, at: Span },
    #[error("initial value {value} of `{name}` does not fit in {width} bits")]
    InitOutOfRange { name: String, value: u64, width: u32 },
}

impl ParseError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ParseError::Syntax { at, .. }
            | ParseError::Duplicate { at, .. }
            | ParseError::Undeclared { at, .. }
            | ParseError::ImpureAssertion { at, .. } => Some(*at),
            ParseError::InitOutOfRange { .. } => None,
        }
    }
}

/// Why the fault-free run of a workload was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoldenError {
    #[error("golden run trapped at step {step}: {trap}")]
    Trap { step: u64, trap: Trap },
    #[error("golden run exceeded the step bound of {limit}")]
    StepLimit { limit: u64 },
    #[error("assertion `{id}` fails in the golden run at step {step}")]
    AssertionFailed { id: String, step: u64 },
}

/// Runtime error raised by the workload itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Trap {
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: u32, len: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Golden(#[from] GoldenError),
    #[error("configuration has {got} bits but the program has {expected} assertions")]
    ConfigLength { expected: usize, got: usize },
    #[error("invalid configuration string `{0}` (expected only '0' and '1')")]
    ConfigSyntax(String),
    #[error("fault coordinate (t={t}, bit={bit}) outside fault space {steps}x{bits}")]
    CoordinateOutOfRange { t: u64, bit: u64, steps: u64, bits: u64 },
    #[error("{n} assertions exceed the exhaustive limit of {limit}")]
    TooManyAssertions { n: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("malformed result file at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("result file digest {found} does not match program digest {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
