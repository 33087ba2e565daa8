use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("functions live on different quadrature meshes")]
    MeshMismatch,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("too many integration steps ({steps}) before reaching t = {t}")]
    TooManySteps { steps: usize, t: f64 },

    #[error("{what} is ill-conditioned at λ = {lambda} (condition number {cond:e})")]
    IllConditioned {
        what: &'static str,
        lambda: Complex64,
        cond: f64,
    },

    #[error("boundary parameter is not admissible: {0}")]
    Admissibility(String),

    #[error("{what} requires τ in operator form")]
    OperatorFormRequired { what: &'static str },

    #[error("{what} requires a self-adjoint boundary parameter")]
    NotSelfAdjoint { what: &'static str },

    #[error("{what} residual {value:e} exceeds tolerance {tol:e}")]
    ResidualBreach {
        what: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("λ = {lambda} is not allowed here: {reason}")]
    SpectralParameter {
        lambda: Complex64,
        reason: &'static str,
    },
}
