use thiserror::Error;

use crate::grammar::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `start` declaration")]
    MissingStart,
    #[error("symbol name `{0}` is reserved")]
    ReservedName(String),
    #[error("grammar is not well-formed:\n{0}")]
    Invalid(ValidationReport),
    #[error("`{0}` is not a terminal of the grammar")]
    UnknownTerminal(String),
    #[error("unknown output format `{0}`")]
    UnknownFormat(String),
    #[error("malformed table dump, line {line}: {message}")]
    TableDump { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
