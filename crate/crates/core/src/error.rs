use thiserror::Error;

use crate::scene::Violation;

pub type Result<T> = std::result::Result<T, DsmError>;

#[derive(Debug, Error)]
pub enum DsmError {
    #[error("Bessel order {order} exceeds the supported ceiling {ceiling}")]
    UnsupportedOrder { order: usize, ceiling: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scene rejected: {}", format_violations(.0))]
    SceneRejected(Vec<Violation>),

    #[error("linear solve failed (condition estimate {condition:e})")]
    Solver { condition: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(DsmError::InvalidInput(msg.into()))
}
