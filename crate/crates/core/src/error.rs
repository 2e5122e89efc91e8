use thiserror::Error;

/// Errors raised by the model, the Fock machinery and the CLI front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// σ1σ2 − |η|² is too small for the two-mode density to be normalizable.
    #[error("degenerate covariance: sigma1*sigma2 - |eta|^2 = {det:e} (threshold {threshold:e})")]
    DegenerateCovariance { det: f64, threshold: f64 },

    #[error("quadratic coefficient must be positive, got {0}")]
    NonPositiveQuadratic(f64),

    #[error("moment order {order} exceeds cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },

    #[error("photon number {requested} exceeds cap {cap}")]
    PhotonCapExceeded { requested: usize, cap: usize },

    #[error("precision loss: estimated error {estimate:e} vs magnitude {magnitude:e}")]
    PrecisionLoss { estimate: f64, magnitude: f64 },

    #[error("tail mass {tail:e} exceeds tolerance {tolerance:e}")]
    TailToleranceExceeded { tail: f64, tolerance: f64 },

    /// A statistical or numerical acceptance check did not hold.
    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error("need at least {required} frames, got {got}")]
    InsufficientFrames { required: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::PrecisionLoss { .. } => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
