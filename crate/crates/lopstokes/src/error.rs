use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive (got {value})")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("surface tension must be non-negative (got {0})")]
    NegativeSurfaceTension(f64),
    #[error("densities must differ: rho_plus = rho_minus = {0}")]
    EqualDensities(f64),
    #[error("sector half-angle epsilon must lie in (0, pi/2) (got {0})")]
    InvalidSector(f64),
    #[error("lambda0 must be non-negative (got {0})")]
    InvalidCutoff(f64),
    #[error("lambda = {re}{im:+}i lies outside the sector")]
    OutOfSector { re: f64, im: f64 },
    #[error("tangential frequency must be nonzero with 1 or 2 components")]
    InvalidFrequency,
    #[error("x_N = {0} lies on the wrong side of the interface for this phase")]
    WrongSign(f64),
    #[error("Lopatinski determinant vanished (|det L| = {0:e})")]
    SingularDetL(f64),
    #[error("lambda + K is not invertible (|lambda + K| = {0:e}); use |lambda| above the certified cutoff")]
    HeightNotInvertible(f64),
    #[error("scan produced non-positive omega = {0:e}")]
    NonPositiveOmega(f64),
    #[error("asymptotic deviation {deviation:e} exceeds {limit:e}")]
    AsymptoticMismatch { deviation: f64, limit: f64 },
    #[error("no cutoff lambda0 within the grid achieves the height bound")]
    NoCutoffFound,
    #[error("grid too coarse for refinement comparison: {0}")]
    GridTooCoarse(String),
    #[error("data has a zero-frequency component of relative size {0:e}; supply mean-free data or enable projection")]
    ZeroModeData(f64),
    #[error("adaptive quadrature did not converge (estimated error {0:e})")]
    QuadratureFailure(f64),
    #[error("kernel envelope unbounded: drift {0:.3}")]
    EnvelopeUnbounded(f64),
    #[error("grid shape must be powers of two >= 16 matching the box (got {0:?})")]
    InvalidGrid(Vec<usize>),
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
