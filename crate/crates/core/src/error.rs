//! Error type shared by all modules.

/// Errors surfaced by the algebra kernel and its clients.
///
/// The variants mirror the failure classes of the public operations:
/// `Argument` for out-of-range parameters, `Domain` for algebraically
/// impossible requests (inverting a non-unit, mapping a Laurent exponent to a
/// non-unit image), `Precondition` for violated operation contracts,
/// `MalformedRing` for non-terminating or non-confluent rewriting systems,
/// `Construction` for invalid nerves or charts, `Resource` for exceeded
/// degree/depth ceilings, `Invariant` for detected mathematical
/// inconsistencies, and `Parse`/`Schema` for malformed input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed ring: {0}")]
    MalformedRing(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
