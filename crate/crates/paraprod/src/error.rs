use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol returned a non-finite value at frequency {xi:?}")]
    NonFiniteSymbol { xi: Vec<f64> },

    #[error("non-finite weight value at t = {t}")]
    NonFiniteWeight { t: f64 },

    #[error(
        "scale grid [{have_min}, {have_max}] does not cover the annulus window \
         [{need_min}, {need_max}] of |xi| = {xi_mag}"
    )]
    ScaleCoverage {
        xi_mag: f64,
        need_min: f64,
        need_max: f64,
        have_min: f64,
        have_max: f64,
    },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed field file: {0}")]
    Format(String),
}
