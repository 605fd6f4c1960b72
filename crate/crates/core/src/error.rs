use thiserror::Error;

/// Errors raised by the geometry, symbol and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {name} is not defined in dimension {dim}")]
    UndefinedPoint { name: &'static str, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectral parameter {re}+{im}i lies on the spectrum [0, inf)")]
    SpectralParameter { re: f64, im: f64 },

    #[error("exponent pair ({x}, {y}) is not in a region with a known resolvent bound")]
    UnsupportedExponent { x: String, y: String },

    #[error("symbol evaluated at the singular frequency xi = 0")]
    SingularFrequency,

    #[error("pole: {0}")]
    Pole(String),

    #[error("degenerate Lame ratio rho = 1 (lambda + mu = 0)")]
    DegenerateRatio,

    #[error("invalid Lame coefficients: {0}")]
    InvalidParameters(String),

    #[error("grid does not resolve the test function along axis {axis}; need at least n = {min_n}")]
    UnresolvedScale { axis: usize, min_n: usize },

    #[error("symbol has a pole on the frequency lattice at {at:?}; use a half-cell offset")]
    PoleOnGrid { at: Vec<f64> },

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("excluded parameter: {0}")]
    ExcludedParameter(String),

    #[error("exponent order violated: need p <= q (got p = {p}, q = {q})")]
    ExponentOrder { p: f64, q: f64 },

    #[error("dense operator of order {order} exceeds the cap {cap}")]
    SizeCap { order: usize, cap: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("field file: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for invalid input, 3 for failures of an
    /// experiment on valid input, 1 for internal and i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UndefinedPoint { .. }
            | Error::Domain(_)
            | Error::SpectralParameter { .. }
            | Error::UnsupportedExponent { .. }
            | Error::DegenerateRatio
            | Error::InvalidParameters(_)
            | Error::ParameterRange(_)
            | Error::ExcludedParameter(_)
            | Error::ExponentOrder { .. }
            | Error::Format(_) => 2,
            Error::SingularFrequency
            | Error::Pole(_)
            | Error::UnresolvedScale { .. }
            | Error::PoleOnGrid { .. }
            | Error::SizeCap { .. }
            | Error::Eigen(_) => 3,
            Error::Shape(_) | Error::Io(_) => 1,
        }
    }
}
