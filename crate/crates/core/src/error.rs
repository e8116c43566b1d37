use thiserror::Error;

/// Errors produced by state construction and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("state family `{family}` does not support {n} parties: {reason}")]
    UnsupportedPartyCount {
        family: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid party selection: {0}")]
    InvalidParties(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("instrument on party {party} is not trace non-increasing (max eigenvalue of sum E^dag E = {max_eigenvalue})")]
    IncompleteInstrument { party: usize, max_eigenvalue: f64 },

    #[error("branch is impossible (probability {probability:e})")]
    ImpossibleBranch { probability: f64 },

    #[error("{what} refused for {n} parties (limit {limit})")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("evaluation budget exceeded: {requested} evaluations requested, budget {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("state is not diagonal in the computational basis (off-diagonal magnitude {0:e})")]
    NotDiagonal(f64),

    #[error("protocol violates communication constraint: {0}")]
    ConstraintViolation(String),

    #[error("protocol step is not a closed local operation: {0}")]
    NonClocc(String),

    #[error("malformed scenario: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a numeric argument outside its domain.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::ImpossibleBranch { .. }
                | Error::IncompleteInstrument { .. }
                | Error::NotDiagonal(_)
        )
    }

    /// True for refusals caused by system size or evaluation budget.
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::TooLarge { .. } | Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
