use thiserror::Error;

use crate::concept::TBoxErrors;
use crate::normal::UnfoldingBudgetExceeded;
use crate::syntax::{KbError, Side, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    InvalidTBox(#[from] TBoxErrors),
    #[error(transparent)]
    UnfoldingBudgetExceeded(#[from] UnfoldingBudgetExceeded),
    #[error("the {0} advertisement is unsatisfiable")]
    UnsatisfiableAdvertisement(Side),
    #[error("the two concepts are incompatible; use contraction instead")]
    PartialMatch,
    #[error("candidate enumeration exceeded its budget of {0}")]
    EnumerationBudgetExceeded(usize),
    #[error("input is outside the oracle bounds: {0}")]
    OracleBudgetExceeded(String),
    #[error("the reference preference has no strictly ordered pair")]
    EmptyPreference,
    #[error("ranking and preference cover different ids")]
    MismatchedIds,
}

impl From<KbError> for Error {
    fn from(e: KbError) -> Self {
        match e {
            KbError::Syntax(s) => Error::Syntax(s),
            KbError::InvalidTBox(t) => Error::InvalidTBox(t),
        }
    }
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "syntax",
            Error::InvalidTBox(_) => "invalid-tbox",
            Error::UnfoldingBudgetExceeded(_) => "unfolding-budget",
            Error::UnsatisfiableAdvertisement(_) => "unsatisfiable-advertisement",
            Error::PartialMatch => "partial-match",
            Error::EnumerationBudgetExceeded(_) => "enumeration-budget",
            Error::OracleBudgetExceeded(_) => "oracle-budget",
            Error::EmptyPreference => "empty-preference",
            Error::MismatchedIds => "mismatched-ids",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
