use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("affine forms are defined over different perturbation boxes")]
    BoxMismatch,

    #[error("input variable {index} out of range for a {dim}-dimensional box")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid perturbation box: {0}")]
    InvalidBox(String),

    #[error("divisor range [{lo}, {hi}] is not strictly positive")]
    NonPositiveDivisorRange { lo: f64, hi: f64 },

    #[error("contraction assertion failed: norm(I - X*X0) upper bound {norm} >= 1")]
    ContractionViolated { norm: f64 },

    /// `axis` is the box variable the covariance is most sensitive to, when known.
    #[error("contraction assertion failed for gaussian {gaussian} (norm bound {norm})")]
    GaussianContraction { gaussian: usize, norm: f64, axis: Option<usize> },

    #[error("contraction assertion failed for gaussian {gaussian} after {splits} box splits")]
    UnrecoverableContraction { gaussian: usize, splits: usize },

    #[error("reference matrix is singular")]
    SingularReference,

    #[error("determinant interval [{lo}, {hi}] contains zero")]
    DeterminantStraddlesZero { lo: f64, hi: f64 },

    #[error("projected covariance of gaussian {gaussian} is numerically singular (condition {condition:e})")]
    SingularConic { gaussian: usize, condition: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("gaussian {index}: covariance is not positive definite")]
    NonPsdCovariance { index: usize },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that the caller can resolve by splitting the perturbation box.
    pub fn is_contraction(&self) -> bool {
        matches!(self, Error::ContractionViolated { .. } | Error::GaussianContraction { .. })
    }
}
