//! Error taxonomy shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("denominator divisible by p = {p}")]
    PDivides { p: u64 },
    #[error("ambiguous integer lift: {0}")]
    AmbiguousLift(String),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("point {index} is not singular: {reason}")]
    NotSingular { index: usize, reason: String },
    #[error("point {index} is not an ordinary double point")]
    NotOdp { index: usize },
    #[error("singularities are not isolated over {field}")]
    NotIsolated { field: String },
    #[error("equisingularity check failed at p = {p}: {reasons}")]
    Equisingularity { p: u64, reasons: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transversality failure: {0}")]
    TransversalityFailure(String),
    #[error("residue not in the Jacobian ideal at pole order {pole_order}")]
    ResidueNotInIdeal { pole_order: usize },
    #[error("evaluation matrix singular in degree {degree}")]
    SingularSolRed { degree: usize },
    #[error("Weil bound violated: {0}")]
    WeilViolation(String),
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("enumeration of {required} points exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("zeta function disagrees with point count at r = {r}: predicted {predicted}, counted {counted}")]
    Mismatch {
        r: u32,
        predicted: String,
        counted: String,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Invalid(_) => 1,
            Error::NotSingular { .. } | Error::NotOdp { .. } | Error::NotIsolated { .. } => 2,
            Error::Equisingularity { .. } => 3,
            Error::PDivides { .. } | Error::AmbiguousLift(_) | Error::BudgetExceeded { .. } => 4,
            _ => 5,
        }
    }
}
