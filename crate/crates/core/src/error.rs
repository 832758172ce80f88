use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("insufficient depth: need {needed} known coefficients, have {available}")]
    InsufficientDepth { needed: usize, available: usize },
    #[error("operation undefined for the zero operator")]
    ZeroOperator,
    #[error("weight order {0} is below 1")]
    WeightOrderTooSmall(i64),
    #[error("leading symbol vanishes at k = {0}")]
    PropertyPFailure(u64),
    #[error("determinant is not constant (degree {0})")]
    NonConstantDeterminant(usize),
    #[error("determinant vanishes")]
    ZeroDeterminant,
    #[error("alphas must be nonzero and pairwise distinct")]
    DegenerateAlphas,
    #[error("|beta|_v = {beta_abs} does not exceed H_v(alpha) = {height}")]
    BadBeta { beta_abs: String, height: String },
    #[error("kernel route and series route disagree: {0}")]
    RouteMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse {0:?} as a rational number")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
