use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation (bad direction index,
    /// non-face index set, vertex outside a grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computed structure violates an invariant it must satisfy (∂∘∂ ≠ 0, a
    /// chain face that is not in the basis, a representative that is not a cycle).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// The input model is unusable for the requested computation.
    #[error("model error: {0}")]
    Model(String),

    /// Operands of a product do not fit together.
    #[error("operand error: {0}")]
    Operand(String),

    #[error("unsupported degree {0}: only degree-1 classes are supported here")]
    UnsupportedDegree(usize),

    #[error("{line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
