use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one failure class
/// so front ends can translate them into exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arrangement kind mismatch: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("observable list is empty")]
    EmptyObservables,

    #[error(
        "invalid grid size: n_theta = {n_theta}, n_phi = {n_phi} (need n_theta >= 2, n_phi >= 1)"
    )]
    InvalidGrid { n_theta: usize, n_phi: usize },

    #[error("prior density must be strictly positive (found {value} at node {node})")]
    NonPositivePrior { node: usize, value: f64 },

    #[error("joint density is not compatible with the Born conditional at node {node} (deviation {deviation:e})")]
    IncompatibleJoint { node: usize, deviation: f64 },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("sigma_z = {0} is outside the solvable range |sigma_z| <= 1 - 1e-9")]
    OutOfRange(f64),

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
