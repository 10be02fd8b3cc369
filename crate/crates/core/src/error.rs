use thiserror::Error;

/// Broad classes of failure, used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid inputs or incompatible options.
    Config,
    /// The model has no steady state or no admissible operating point.
    Infeasible,
    /// A numerical method lost accuracy or failed to converge.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pole at s = {s}")]
    Pole { s: f64 },
    #[error("the mean is infinite")]
    InfiniteMean,
    #[error("generating function is not normalized: G(1) = {value}")]
    NotNormalized { value: f64 },
    #[error("denominator vanishes at s = 0")]
    ZeroConstantDenominator,
    #[error("coefficient magnitude {magnitude:e} exceeds 1e300")]
    CoefficientOverflow { magnitude: f64 },
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("tail recursion unstable at k = {k}: value {value:e}")]
    UnstableInversion { k: usize, value: f64 },
    #[error("no exponential moments: radius of convergence is not above 1")]
    EmptyWindow,
    #[error("minimization failed: {0}")]
    OptimizerFailure(String),
    #[error("traffic intensity {intensity} is not below 1")]
    Unstable { intensity: f64 },
    #[error("no arrival rate meets the target {target:e}")]
    NoFeasibleRate { target: f64 },
    #[error("policy {policy} requires geometric service")]
    IncompatibleService { policy: String },
    #[error("the packet-management chain has no departures (d = 0)")]
    DegenerateChain,
    #[error("probability masses sum to {sum}")]
    Normalization { sum: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_)
            | Error::IncompatibleService { .. }
            | Error::NotNormalized { .. }
            | Error::ZeroConstantDenominator
            | Error::Normalization { .. } => ErrorClass::Config,
            Error::Unstable { .. }
            | Error::NoFeasibleRate { .. }
            | Error::DegenerateChain
            | Error::InfiniteMean => ErrorClass::Infeasible,
            Error::Pole { .. }
            | Error::CoefficientOverflow { .. }
            | Error::DegreeOverflow { .. }
            | Error::UnstableInversion { .. }
            | Error::EmptyWindow
            | Error::OptimizerFailure(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
