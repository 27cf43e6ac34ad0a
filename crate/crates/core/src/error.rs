use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last relative spread {spread:e})")]
    Convergence { iterations: usize, spread: f64 },

    #[error("quadrature did not converge with {nodes} nodes: last estimates {previous:e} and {last:e}")]
    Quadrature {
        nodes: usize,
        previous: f64,
        last: f64,
    },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("unsupported genus {genus}: {reason}")]
    UnsupportedGenus { genus: usize, reason: String },

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI's error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Quadrature { .. } => "quadrature",
            Error::LinearAlgebra(_) => "linear_algebra",
            Error::Ordering(_) => "ordering",
            Error::UnsupportedGenus { .. } => "unsupported_genus",
            Error::Input(_) => "input",
        }
    }
}
