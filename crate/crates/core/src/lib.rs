//! Goal-oriented mutation testing for MiniLang.
//!
//! The pipeline: parse a project ([`frontend`]), generate first-order mutants
//! ([`mutantgen`]), map tests to the methods they focus on ([`focal`]), pick
//! tests per mutant ([`selection`]), execute ([`engine`]) and summarise
//! ([`report`]).

pub mod corpus;
pub mod engine;
pub mod error;
pub mod focal;
pub mod frontend;
pub mod interp;
pub mod mutantgen;
pub mod project;
pub mod report;
pub mod selection;
pub mod store;
pub mod verify;

pub use error::{FrontendError, MutantError, ProjectError};
pub use frontend::ast::{MethodRef, Program, TestId};
pub use frontend::{parse_program, PrettyPrint};
pub use project::{load_project, Config, Project, Settings};
pub use selection::Strategy;
