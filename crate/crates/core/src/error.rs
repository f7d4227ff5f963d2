use thiserror::Error;

use crate::frontend::ast::Location;

/// Load-time failures: everything that prevents a project from becoming a resolved [`crate::Program`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{location}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        location: Location,
        expected: Vec<String>,
        found: String,
    },
    #[error("{location}: {message}")]
    Lex { location: Location, message: String },
    #[error("{location}: unresolved {kind} `{name}`")]
    Unresolved {
        location: Location,
        kind: &'static str,
        name: String,
    },
    #[error("{location}: duplicate {kind} `{name}`")]
    Duplicate {
        location: Location,
        kind: &'static str,
        name: String,
    },
    #[error("{location}: {message}")]
    Invalid { location: Location, message: String },
    #[error("`{path}` is neither under src/ nor under tests/")]
    UnknownPath { path: String },
}

impl FrontendError {
    pub fn location(&self) -> Option<&Location> {
        match self {
            FrontendError::Syntax { location, .. }
            | FrontendError::Lex { location, .. }
            | FrontendError::Unresolved { location, .. }
            | FrontendError::Duplicate { location, .. }
            | FrontendError::Invalid { location, .. } => Some(location),
            FrontendError::UnknownPath { .. } => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("cannot read project `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("invalid config `{path}` line {line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutantError {
    #[error("stale mutant `{id}`: {reason}")]
    Stale { id: String, reason: String },
}
