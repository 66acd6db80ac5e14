use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("resource limit: {what} needs {requested}, limit is {limit}")]
    Resource {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("metric validation failed: {0}")]
    Metric(MetricViolation),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A proven inequality failed numerically. Always a bug somewhere.
    #[error("inequality violated: {0}")]
    Violation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    Shape { rows: usize, expected: usize },
    NonFinite { a: usize, b: usize },
    Diagonal { a: usize, value: f64 },
    Asymmetric { a: usize, b: usize },
    NonPositive { a: usize, b: usize },
    /// `d(a, c) > d(a, b) + d(b, c)`
    Triangle { a: usize, b: usize, c: usize, lhs: f64, rhs: f64 },
    Measure { a: usize, value: f64 },
    Empty,
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MetricViolation::Shape { rows, expected } => {
                write!(f, "distance matrix has {rows} rows of wrong length, expected {expected}")
            }
            MetricViolation::NonFinite { a, b } => write!(f, "d({a},{b}) is not finite"),
            MetricViolation::Diagonal { a, value } => write!(f, "d({a},{a}) = {value} != 0"),
            MetricViolation::Asymmetric { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            MetricViolation::NonPositive { a, b } => write!(f, "d({a},{b}) <= 0 for distinct points"),
            MetricViolation::Triangle { a, b, c, lhs, rhs } => write!(
                f,
                "triangle inequality fails for ({a},{b},{c}): d({a},{c}) = {lhs} > d({a},{b}) + d({b},{c}) = {rhs}"
            ),
            MetricViolation::Measure { a, value } => {
                write!(f, "measure of point {a} is {value}, must be positive and finite")
            }
            MetricViolation::Empty => write!(f, "space has no points"),
        }
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
