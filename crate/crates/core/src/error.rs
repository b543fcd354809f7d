use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("measure is a point mass")]
    DiracMeasure,
    #[error("measure has negative mass: {0}")]
    NegativeMass(String),
    #[error("measure has zero total mass")]
    EmptyMeasure,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point {0} lies on the support of the measure")]
    OnSupport(String),
    #[error("no convergence in {0}")]
    NoConvergence(String),
    #[error("solution of {0} landed in the wrong branch")]
    WrongBasin(String),
    #[error("a = {0} is outside the real section of the domain")]
    OutsideOmega(f64),
    #[error("point {0} is outside the closed domain")]
    OutsideLambda(String),
    #[error("point {0} is not outside the closed domain")]
    OutsideOnly(String),
    #[error("degenerate Jacobian: {0}")]
    DegenerateJacobian(String),
    #[error("time {t} is past the lifetime {lifetime} of the characteristic")]
    PastLifetime { t: f64, lifetime: f64 },
    #[error("logarithmic integral diverges at {0}")]
    DivergentLog(String),
    #[error("two branches give different values: {0}")]
    AmbiguousBranch(String),
    #[error("fixed-point iteration collapsed to the real line at a = {0}")]
    NoComplexSolution(f64),
    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),
}

impl Error {
    /// True for errors caused by malformed or inadmissible input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DiracMeasure
                | Error::NegativeMass(_)
                | Error::EmptyMeasure
                | Error::InvalidMeasure(_)
                | Error::InvalidArgument(_)
        )
    }

    /// True for errors raised by an iterative solver.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::WrongBasin(_)
                | Error::AmbiguousBranch(_)
                | Error::NoComplexSolution(_)
                | Error::EigenFailure(_)
                | Error::DegenerateJacobian(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
