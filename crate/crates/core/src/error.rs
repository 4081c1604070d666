use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps these onto process exit codes: model/parameter/config
/// problems are exit 1, I/O problems exit 2, numerical solver failures
/// exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Model validation collects every violation before failing.
    #[error("model validation failed:\n  {}", violations.join("\n  "))]
    InvalidModel { violations: Vec<String> },

    #[error("invalid {what}: {message}")]
    InvalidParameter { what: &'static str, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("config section `{0}` is required by this command")]
    MissingSection(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("steady state is not unique: Liouvillian kernel dimension is {kernel_dim}")]
    DegenerateSteadyState { kernel_dim: usize },

    #[error("solver produced a non-physical density matrix: {reason}")]
    NonPhysicalState { reason: String },

    #[error("input is not a steady state of this generator (residual {residual:.3e})")]
    NotSteadyState { residual: f64 },

    #[error("propagation horizon {horizon:.3e} ps exceeds the {cap:.1e} ps cap")]
    PropagationTimeout { horizon: f64, cap: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("fit rejected: {0}")]
    Fit(String),
}

impl Error {
    pub fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
