//! Error type shared by every evaluation route.

use crate::series::SeriesResult;

/// Failures raised while classifying, validating or evaluating an operator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("gamma ratio has a pole in the numerator at {0}")]
    NumeratorPole(f64),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("order alpha = {0} is outside [0, 1]")]
    InvalidOrder(f64),

    #[error("lower limit a = {a} lies outside the domain {domain}")]
    LowerLimitOutsideDomain { a: f64, domain: String },

    #[error("lower limit equals d = {0} but the power function is not analytic there")]
    CenteredNotAnalytic(f64),

    #[error("t = {t} is outside the convergence window [{t_min}, {t_sup})")]
    WindowViolation { t: f64, t_min: f64, t_sup: f64 },

    #[error("the result is singular at the lower limit t = a = {0}")]
    EvalAtLowerLimit(f64),

    #[error("series did not converge after {} terms (remainder bound {:e})", .0.terms_used, .0.remainder_bound)]
    SeriesNotConverged(Box<SeriesResult>),

    #[error("closed centered form needs beta > -1, got {0}")]
    BetaOutOfRange(f64),

    #[error("hypergeometric argument {0} is outside the unit disk")]
    ArgOutOfDisk(f64),

    #[error("hypergeometric parameter c = {0} hits a pole before the series terminates")]
    ParamPole(f64),

    #[error("alpha + beta = {0} is an integer; the connection formula degenerates")]
    DegenerateExponentSum(f64),

    #[error("the integrand has a pole at x = {d} inside [{a}, {t}]")]
    PoleInsideInterval { a: f64, t: f64, d: f64 },

    #[error("quadrature tolerance not met (estimated error {0:e})")]
    ToleranceNotMet(f64),

    #[error("finite-difference step h = {h} reaches the lower limit (t - h <= a)")]
    StepTooLarge { h: f64 },

    #[error("t = {t} is outside the radius of convergence of the logarithm series")]
    OutOfRadius { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
