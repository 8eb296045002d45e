use thiserror::Error;

/// Errors produced by the distance engines, the transport oracle and the
/// ingestion helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input")]
    EmptyInput,

    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(String),

    #[error("non-finite value in input: {0}")]
    NonFinite(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("the supplied dependence structure is not a copula: {0}")]
    NotACopula(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("p and q must differ for norm-equivalence bounds (both {0})")]
    EqualExponents(f64),

    /// The moment of order `p` could not be certified finite.
    #[error("moment of order {p} is not finite")]
    MomentGate { p: f64 },

    #[error("quadrature did not converge: estimate {estimate:e} above tolerance {tol:e} after {intervals} intervals")]
    Quadrature { estimate: f64, tol: f64, intervals: usize },

    #[error("instance too large: {n} atoms exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("cost function returned a non-finite or negative value {0}")]
    InvalidCost(f64),

    #[error("assignment requires equal counts and equal masses: {0}")]
    NotAnAssignment(String),

    #[error("transport problem is infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
