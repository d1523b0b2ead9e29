use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bosonic occupation undefined at energy {energy} (must be > 0)")]
    BosonicDomain { energy: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate point: coupling = 0 and e_L = e_R, eigenbasis undefined")]
    DegenerateBasis,

    #[error("generator modes differ ({0} vs {1})")]
    ModeMismatch(&'static str, &'static str),

    #[error("step size {dt} too large: dt * spectral radius = {product} (limit {limit})")]
    StepSize { dt: f64, product: f64, limit: f64 },

    #[error("stochastic step {step} left the population guard band (value {value})")]
    GuardBand { step: usize, value: f64 },

    #[error("steady state is not unique (generator kernel has dimension > 1)")]
    DegenerateSteadyState,

    #[error("right-hand side is not traceless (trace = {0})")]
    NotTraceless(f64),

    #[error("finite-difference derivative did not converge (relative change {0})")]
    FiniteDifference(f64),

    #[error("contour is not closed (gap {0})")]
    OpenContour(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
