use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the engine. Each variant maps to one machine code via
/// [`Error::code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("malformed prefixed name `{0}`")]
    MalformedCurie(String),
    #[error("relative IRI `<{0}>` is not supported")]
    RelativeIri(String),
    #[error("prefix `{prefix}` bound to both <{first}> and <{second}>")]
    PrefixConflict { prefix: String, first: String, second: String },
    #[error("malformed literal: {0}")]
    MalformedLiteral(String),

    #[error("property {0} is declared both as object and datatype property")]
    PropertyKindConflict(String),
    #[error("subproperty link between object property {object} and datatype property {datatype}")]
    MixedPropertyLink { object: String, datatype: String },

    #[error("malformed term at offset {offset}: {message}")]
    MalformedTerm { offset: usize, message: String },
    #[error("terms of different kinds cannot be compared: {0}")]
    KindMismatch(String),

    #[error("unknown edge code {0}")]
    UnknownEdgeCode(i64),
    #[error("edge {edge} refers to missing node {node}")]
    DanglingEdge { edge: String, node: String },
    #[error("malformed CSV row {row}: {message}")]
    MalformedRow { row: usize, message: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("rule error on line {line}: {message}")]
    Rule { line: usize, message: String },

    #[error("unknown candidate {0}")]
    UnknownCandidate(u32),
    #[error("illegal transition: {0}")]
    IllegalTransition(String),
    #[error("cannot accept a trivial correspondence: {0}")]
    TrivialAccept(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("malformed session log line {line}: {message}")]
    SessionLog { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax_error",
            Error::UnknownPrefix(_) => "unknown_prefix",
            Error::MalformedCurie(_) => "malformed_curie",
            Error::RelativeIri(_) => "relative_iri",
            Error::PrefixConflict { .. } => "prefix_conflict",
            Error::MalformedLiteral(_) => "malformed_literal",
            Error::PropertyKindConflict(_) => "property_kind_conflict",
            Error::MixedPropertyLink { .. } => "mixed_property_link",
            Error::MalformedTerm { .. } => "malformed_term",
            Error::KindMismatch(_) => "kind_mismatch",
            Error::UnknownEdgeCode(_) => "unknown_edge_code",
            Error::DanglingEdge { .. } => "dangling_edge",
            Error::MalformedRow { .. } => "malformed_row",
            Error::Csv(_) => "csv_error",
            Error::Rule { .. } => "rule_error",
            Error::UnknownCandidate(_) => "unknown_candidate",
            Error::IllegalTransition(_) => "illegal_transition",
            Error::TrivialAccept(_) => "trivial_accept",
            Error::IllegalMove(_) => "illegal_move",
            Error::SessionLog { .. } => "session_log",
            Error::Config(_) => "config_error",
            Error::Io { .. } => "io_error",
        }
    }

    /// Line/column (or line only) for parse errors.
    pub fn location(&self) -> Option<String> {
        match self {
            Error::Syntax { line, column, .. } => Some(format!("{line}:{column}")),
            Error::Rule { line, .. } | Error::SessionLog { line, .. } => Some(line.to_string()),
            Error::MalformedRow { row, .. } => Some(format!("row {row}")),
            Error::MalformedTerm { offset, .. } => Some(format!("offset {offset}")),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
