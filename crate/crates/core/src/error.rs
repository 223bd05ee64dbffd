use std::fmt;
use std::sync::Arc;

use crate::term::{Indicator, Term};

/// A position in a source file; lines and columns start at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location {
    pub file: Arc<str>,
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn new(file: &str, line: usize, column: usize) -> Self {
        Location { file: Arc::from(file), line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{location}: syntax error: {message}")]
pub struct SyntaxError {
    pub message: String,
    pub location: Location,
}

impl SyntaxError {
    pub fn new(message: impl Into<String>, location: Location) -> Self {
        SyntaxError { message: message.into(), location }
    }
}

/// Errors raised while building the module database.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{location}: module `{name}` is already declared")]
    DuplicateModule { name: String, location: Location },
    #[error("{location}: {message}")]
    Directive { message: String, location: Location },
    #[error("{location}: `{indicator}` is both defined locally and imported from `{from}`")]
    ImportConflict { indicator: Indicator, from: String, location: Location },
    #[error("{location}: module `{from}` does not export `{indicator}`")]
    NotExported { indicator: Indicator, from: String, location: Location },
    #[error("import cycle: {}", .0.join(" -> "))]
    ImportCycle(Vec<String>),
    #[error("{location}: invalid clause: {message}")]
    InvalidClause { message: String, location: Location },
    #[error("module `{module}` exports `{indicator}` which is neither defined, imported nor tool-linked")]
    UndefinedExport { module: String, indicator: Indicator },
    #[error("{location}: cannot redefine built-in predicate `{indicator}`")]
    Builtin { indicator: Indicator, location: Location },
    #[error("specialization would redefine `{module}:{indicator}`")]
    SpecializationCollision { module: String, indicator: Indicator },
    #[error("{0}")]
    Strict(String),
}

/// Errors surfacing from query execution.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EngineError {
    /// An uncaught exception; the term is the thrown ball.
    #[error("uncaught exception: {}", crate::engine::write::to_canonical(.0))]
    Uncaught(Term),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

impl EngineError {
    /// The `Formal` part of an `error(Formal, Context)` ball.
    pub fn formal(&self) -> Option<&Term> {
        match self {
            EngineError::Uncaught(Term::Compound(f, args)) if f == "error" && args.len() == 2 => Some(&args[0]),
            _ => None,
        }
    }
}
