use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cyclic order {0}: orders must be >= 1")]
    InvalidOrder(u64),

    #[error("element {coords:?} does not belong to Z{orders:?}")]
    InvalidElement { coords: Vec<u64>, orders: Vec<u64> },

    #[error("parent group mismatch: {0}")]
    GroupMismatch(String),

    #[error("group too large for exhaustive enumeration: |G| = {size}, limit {limit}")]
    TooLarge { size: u64, limit: u64 },

    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),

    #[error("finite part has an element of order 2 (cyclic order {0} is even)")]
    EvenOrder(u64),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("measure is not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("measure is not of Theta shape: {0}")]
    NotThetaShape(String),

    #[error("characteristic function vanishes: {0}")]
    Vanishing(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("infeasible instance: {}", .0.join("; "))]
    Infeasible(Vec<String>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
