use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration was asked for more summands than allowed.
    #[error("enumeration budget exceeded: {n} summands requested, at most {max} allowed")]
    Budget { n: usize, max: usize },

    /// The bound theorems only hold for q = ξ² ≤ 1.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
