use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown scheme `{0}`")]
    NotFound(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("stability function has a pole at z1 = {z1}, z2 = {z2}")]
    Pole { z1: String, z2: String },

    #[error("inner solver did not converge after {iterations} iterations (last update {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system in implicit stage solve")]
    SingularSystem,

    #[error("non-finite value in register after stage computation at t = {t}")]
    Blowup { t: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("interval length {span} is not an integer multiple of h = {h}")]
    NonIntegerSteps { span: f64, h: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reference solution unreliable: {0}")]
    ReferenceUnreliable(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("cannot parse `{input}`: {message}")]
    Parse { input: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Whether the error originates in the numerics rather than in the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. }
            | Error::SingularSystem
            | Error::Blowup { .. }
            | Error::ReferenceUnreliable(_)
            | Error::Pole { .. } => true,
            Error::StepFailed { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            3
        } else {
            2
        }
    }
}
