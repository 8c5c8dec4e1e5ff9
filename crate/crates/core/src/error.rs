use std::fmt;

/// Errors raised by the operator, controller, analysis and experiment layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid construction parameters (mesh bounds, density, gains, grids).
    InvalidParameter(String),
    /// A density, state or model was paired with a different mesh.
    MeshMismatch,
    /// A non-finite input or state value was observed.
    NonFinite(&'static str),
    /// K·κ·dt violates the forward-rule stability bound of 2.
    UnstableLoop { gain: f64, slope: f64, dt: f64 },
    /// A series is too short or badly shaped for the requested metric.
    InsufficientData(String),
    /// Experiment configuration could not be parsed or validated.
    Config(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::MeshMismatch => write!(f, "density or state belongs to a different mesh"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::UnstableLoop { gain, slope, dt } => write!(
                f,
                "integral loop unstable: K*kappa*dt = {} >= 2 (K={gain}, kappa={slope}, dt={dt})",
                gain * slope * dt
            ),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
