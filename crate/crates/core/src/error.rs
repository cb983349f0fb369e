use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the compiler can report.
///
/// Input errors carry the 1-based line number of the offending source line
/// where one exists; [`Error::Invariant`] is reserved for internal
/// consistency checks that should never fail on valid input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: expected {expected} cells, found {found}")]
    RowArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cell {token:?} is not valid in {kind} column {feature:?}")]
    UnknownCellToken {
        line: usize,
        feature: String,
        kind: String,
        token: String,
    },
    #[error("duplicate feature id {0:?}")]
    DuplicateFeatureId(String),
    #[error("unknown structure slot {0:?}")]
    UnknownSlot(String),
    #[error("line {line}: unknown class matrix value {token:?}")]
    UnknownValueToken { line: usize, token: String },
    #[error("line {line}: duplicate class id {class:?}")]
    DuplicateClassId { line: usize, class: String },
    #[error("class {0:?} is not listed in the class matrix")]
    UnknownClass(String),
    #[error("class matrix marks {feature:?} per-entry for {class:?} but the table has no such column")]
    InconsistentMatrix { class: String, feature: String },
    #[error("line {line}: nested alternation group")]
    NestedAlternation { line: usize },
    #[error("line {line}: unterminated {what}")]
    UnterminatedGroup { line: usize, what: &'static str },
    #[error("line {line}: duplicate rule for {pattern} : {feature:?}")]
    DuplicateRule {
        line: usize,
        pattern: String,
        feature: String,
    },
    #[error("line {line}: malformed script rule: {message}")]
    ScriptSyntax { line: usize, message: String },
    #[error("malformed placeholder in template {0:?}")]
    MalformedPlaceholder(String),
    #[error("template {template:?} references column {column:?} which table {table} lacks")]
    UnboundPlaceholder {
        table: String,
        column: String,
        template: String,
    },
    #[error("no realization for symbolic token {0:?}")]
    UnknownSymbolicToken(String),
    #[error("invalid morphology rules: {0}")]
    MorphoRules(String),
    #[error("stats requested with zero initial entries")]
    ZeroInitial,
    #[error("line {line}: schema violation: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("unknown format version {0:?}")]
    UnknownFormatVersion(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn schema(line: usize, message: impl fmt::Display) -> Self {
        Error::SchemaViolation {
            line,
            message: message.to_string(),
        }
    }

    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
