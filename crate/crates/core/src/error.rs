use thiserror::Error;

use crate::detsolve::Equation;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("point ({x}, {y}) lies on a declared singularity")]
    SingularPoint { x: f64, y: f64 },

    #[error("abscissa {at} lies outside the domain ({lo}, {hi})")]
    OutOfDomain { at: f64, lo: f64, hi: f64 },

    #[error("pole at x = {at} inside the requested interval")]
    PoleCollision { at: f64 },

    #[error("solution blows up immediately from x0 = {x0} (pole near {at})")]
    ImmediatePole { x0: f64, at: f64 },

    #[error("solution reaches zero at x = {at} where the equation is singular")]
    ZeroCrossing { at: f64 },

    #[error("invalid initial condition: {0}")]
    InvalidInitialCondition(String),

    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: String },

    #[error("derivative of order {order} is unavailable")]
    DerivativeUnavailable { order: usize },

    #[error("grid node ({x}, {y}) is within {margin} of a singularity")]
    GridSingularity { x: f64, y: f64, margin: f64 },

    #[error("family {family} does not match the coefficient configuration: {reason}")]
    ConfigMismatch { family: String, reason: String },

    #[error("branch turns back at x = {at}; continuation stopped")]
    BranchTurning { at: f64 },

    #[error("seed ({x0}, {v0}) violates the relation (relative residual {residual:e})")]
    SeedInvalid { x0: f64, v0: f64, residual: f64 },

    #[error("integral contains angular-momentum terms; the operator oracle needs pure momentum monomials")]
    NotLFree,

    #[error("the commutator oracle is quantum only (hbar must be positive)")]
    ClassicalOracle,

    #[error("no classical limit declared for `{0}`")]
    NoLimit(String),

    #[error("step size collapsed at t = {t}")]
    StepFailure { t: f64 },

    #[error("quadrature path from ({x0}, {y0}) to ({x}, {y}) meets a singularity")]
    QuadratureDomain { x0: f64, y0: f64, x: f64, y: f64 },

    #[error("the correction fields are infeasible: equation {0} cannot be satisfied")]
    Infeasible(Equation),

    #[error("the integral data are identically zero")]
    TrivialIntegral,

    #[error("I/O failure: {0}")]
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
