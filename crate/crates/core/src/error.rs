use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} failed (residual {residual:e})")]
    Factorization { what: &'static str, residual: f64 },

    #[error("malformed input: {0}")]
    Structural(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("synthesis failed at node {node}: {what} (residual {residual:e})")]
    Synthesis {
        node: String,
        what: &'static str,
        residual: f64,
    },

    #[error("cannot lower {0} gate to the elementary gate set")]
    Lowering(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
