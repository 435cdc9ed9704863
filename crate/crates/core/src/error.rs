use std::fmt;

use thiserror::Error;

/// Source position (1-based line and column).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("variable `{0}` is already registered")]
    DuplicateVar(String),
    #[error("variable order violation: {0}")]
    OrderViolation(String),
    #[error("operands belong to different managers")]
    CrossManager,
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("bit-slice decomposition: {0}")]
    Decomposition(String),
    #[error("ring width must be at least 1 (got {0})")]
    ZeroWidth(u32),
    #[error("exhaustive enumeration needs {points} points (limit {limit}); use sampled mode")]
    StateSpace { points: u128, limit: u128 },
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Semantic { pos: Pos, msg: String },
    #[error("non-constant loop bound: {0}")]
    NonConstantBound(String),
    #[error("unrolling exceeds the limit of {0} statements")]
    UnrollLimit(usize),
    #[error("read of `{0}` before any write")]
    ReadBeforeWrite(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("output `{0}` has no counterpart in the other design")]
    Correspondence(String),
    #[error("unresolvable operand `{0}` (statements out of order)")]
    Unresolved(String),
    #[error("initiation interval {requested} is infeasible; minimum feasible is {minimum}")]
    InfeasibleII { requested: u32, minimum: u32 },
    #[error("node limit of {0} exceeded")]
    NodeLimit(usize),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
