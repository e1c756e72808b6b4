use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input too large: {what} is {actual}, cap is {cap}")]
    TooLarge {
        what: &'static str,
        actual: u128,
        cap: u128,
    },
    #[error("DP capacity exceeded: sum range {width} exceeds {cap}")]
    CapacityExceeded { width: u128, cap: u128 },
    #[error("enumeration budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
    #[error("comparison undecidable at {bits} bits of precision")]
    Undecidable { bits: u32 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
    #[error("expression outside its domain: {0}")]
    Domain(String),
}
