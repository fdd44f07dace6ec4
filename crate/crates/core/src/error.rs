use thiserror::Error;

use crate::menu::Menu;

/// Errors shared by all layers of the crate.
///
/// The CLI maps these onto exit code 2 (input or precondition problems);
/// `Internal` signals a broken invariant rather than bad input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("menu {menu} is not contained in the domain {domain}")]
    DomainViolation { menu: Menu, domain: Menu },

    #[error("{what}: domain has {actual} elements, limit is {limit}")]
    LimitExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("connectivity violation: {0}")]
    Connectivity(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
