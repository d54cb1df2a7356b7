use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("matrix is reducible")]
    Reducible,

    #[error("linear solve failed (residual {residual:e})")]
    Numerical { residual: f64 },

    #[error("subset enumeration needs n <= {max}, got {n}; use the alpha/2 lower bound on mu instead")]
    TooLarge { n: usize, max: usize },

    #[error("assumption {assumption} fails at step {step}: {detail}")]
    Assumption {
        assumption: &'static str,
        step: usize,
        detail: String,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
