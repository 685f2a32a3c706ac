use std::fmt;

/// Everything that can go wrong while building a market or running a solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor argument was rejected (nonpositive rate, NaN, ...).
    InvalidParameter { what: &'static str, value: f64 },
    /// A score `pdf/cdf` was requested where the CDF is zero.
    DivisionByZeroCdf { x: f64 },
    /// A quantile was requested outside the open unit interval.
    QuantileOutOfRange { u: f64 },
    /// A bid fell outside the valuation interval `[0, v]`.
    OutOfRangeBid { bid: f64, v: f64 },
    /// The fixed-point map is undefined where `gamma' <= 0`.
    NonpositiveGammaPrime { b: f64, gamma_prime: f64 },
    /// The payoff vanishes identically on the search interval.
    DegenerateSupport,
    /// An iteration limit claimed convergence but the limit pair failed the
    /// mutual best-response check.
    NotAnEquilibrium {
        b1: f64,
        b2: f64,
        br1: f64,
        br2: f64,
    },
    /// A log-concavity grid touched a point with zero CDF.
    ZeroCdfOnGrid { x: f64 },
    /// The competition CDF must be strictly increasing on `[0, v]`.
    QDerivativeNotPositive { t: f64, derivative: f64 },
    /// A standard-mode family failed the log-concavity check.
    LogConcavityViolated {
        role: &'static str,
        max_second_difference: f64,
    },
    /// A kinked family was supplied where standard mode requires smoothness.
    NonSmoothFamily { role: &'static str },
    /// A grid specification was unusable (reversed bounds, too few points).
    InvalidGrid { reason: &'static str },
    /// A uniqueness probe needs at least two starts to compare.
    TooFewStarts { got: usize },
    /// Simulated planned bids must be strictly positive.
    NonpositiveBid { bid: f64 },
    /// Too few Monte Carlo samples for a meaningful standard error.
    SampleCountTooSmall { n: u64, min: u64 },
    /// A run configuration could not be parsed or validated.
    Config { message: String },
    /// An output file could not be written.
    Io { message: String },
}

impl Error {
    /// Stable machine-readable name of the error variant, used in the CLI's
    /// error JSON.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::DivisionByZeroCdf { .. } => "DivisionByZeroCdf",
            Error::QuantileOutOfRange { .. } => "QuantileOutOfRange",
            Error::OutOfRangeBid { .. } => "OutOfRangeBid",
            Error::NonpositiveGammaPrime { .. } => "NonpositiveGammaPrime",
            Error::DegenerateSupport => "DegenerateSupport",
            Error::NotAnEquilibrium { .. } => "NotAnEquilibrium",
            Error::ZeroCdfOnGrid { .. } => "ZeroCdfOnGrid",
            Error::QDerivativeNotPositive { .. } => "QDerivativeNotPositive",
            Error::LogConcavityViolated { .. } => "LogConcavityViolated",
            Error::NonSmoothFamily { .. } => "NonSmoothFamily",
            Error::InvalidGrid { .. } => "InvalidGrid",
            Error::TooFewStarts { .. } => "TooFewStarts",
            Error::NonpositiveBid { .. } => "NonpositiveBid",
            Error::SampleCountTooSmall { .. } => "SampleCountTooSmall",
            Error::Config { .. } => "Config",
            Error::Io { .. } => "Io",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { what, value } => {
                write!(f, "invalid parameter {what} = {value}")
            }
            Error::DivisionByZeroCdf { x } => {
                write!(f, "score undefined at x = {x}: cdf is zero there")
            }
            Error::QuantileOutOfRange { u } => {
                write!(f, "quantile argument u = {u} outside (0, 1)")
            }
            Error::OutOfRangeBid { bid, v } => {
                write!(f, "bid {bid} outside the valuation interval [0, {v}]")
            }
            Error::NonpositiveGammaPrime { b, gamma_prime } => {
                write!(
                    f,
                    "fixed-point map undefined at b = {b}: gamma' = {gamma_prime} <= 0"
                )
            }
            Error::DegenerateSupport => {
                write!(f, "payoff is identically zero on the bid interval")
            }
            Error::NotAnEquilibrium { b1, b2, br1, br2 } => {
                write!(
                    f,
                    "limit pair ({b1}, {b2}) is not a mutual best response: \
                     best responses are ({br1}, {br2})"
                )
            }
            Error::ZeroCdfOnGrid { x } => {
                write!(f, "log-concavity grid point x = {x} has zero cdf")
            }
            Error::QDerivativeNotPositive { t, derivative } => {
                write!(
                    f,
                    "competition cdf is not strictly increasing: Q'({t}) = {derivative}"
                )
            }
            Error::LogConcavityViolated {
                role,
                max_second_difference,
            } => {
                write!(
                    f,
                    "{role} fails the log-concavity check \
                     (max second difference {max_second_difference:e})"
                )
            }
            Error::NonSmoothFamily { role } => {
                write!(
                    f,
                    "{role} uses the capped-linear family, whose kink violates \
                     the smoothness required in standard mode"
                )
            }
            Error::InvalidGrid { reason } => write!(f, "invalid grid: {reason}"),
            Error::TooFewStarts { got } => {
                write!(f, "uniqueness probe needs at least 2 starts, got {got}")
            }
            Error::NonpositiveBid { bid } => {
                write!(f, "planned bid must be strictly positive, got {bid}")
            }
            Error::SampleCountTooSmall { n, min } => {
                write!(f, "sample count {n} below the minimum of {min}")
            }
            Error::Config { message } => write!(f, "config error: {message}"),
            Error::Io { message } => write!(f, "io error: {message}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io {
            message: e.to_string(),
        }
    }
}
