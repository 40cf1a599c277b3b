use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("p must be an odd prime, got {0}")]
    NotAnOddPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("p^e must fit in 63 bits")]
    ModulusTooLarge,
    #[error("{0} is not a unit")]
    NotAUnit(u64),
    #[error("{0} is not a quadratic residue")]
    NotAResidue(u64),
    #[error("element has no finite multiplicative order")]
    NoFiniteOrder,
    #[error("operation only defined for the convergent-tree parameter case")]
    WrongCase,
    #[error("state space of {q} nodes exceeds budget of {budget}")]
    BudgetExceeded { q: u64, budget: u64 },
}
