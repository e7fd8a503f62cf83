use thiserror::Error;

/// Errors raised by state construction, closed-form evaluation and the
/// consistency checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NbsError {
    #[error("dimension mismatch: left has n_max = {left}, right has n_max = {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation overflow: tail mass {tail:e} at n_max = {n_max} exceeds tolerance {tolerance:e}")]
    TruncationOverflow { n_max: usize, tail: f64, tolerance: f64 },

    #[error("truncation bound exceeds hard cap {hard_cap} (tail tolerance {tolerance:e})")]
    HardCapExceeded { hard_cap: usize, tolerance: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("pole in structure function: coefficient C({index}) vanishes")]
    Pole { index: usize },

    #[error("structure function evaluated outside its support at N = {n}")]
    OutsideSupport { n: usize },

    #[error("projected branch '{branch}' has zero norm")]
    ZeroNormBranch { branch: &'static str },
}

pub type Result<T> = std::result::Result<T, NbsError>;
