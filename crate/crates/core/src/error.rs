use thiserror::Error;

/// Errors shared by all modules. Exact arithmetic never wraps: any
/// computation that would exceed the working integer width reports
/// `Overflow` instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vectors are linearly dependent")]
    DependentVectors,

    #[error("basis is rank deficient")]
    RankDeficient,

    #[error("lattice is not primitive")]
    NotPrimitive,

    #[error("vector is zero or not primitive")]
    NonPrimitiveVector,

    #[error("bound too small: found {found} independent vectors, need {need}")]
    BoundTooSmall { found: usize, need: usize },

    #[error("enumeration budget exceeded (budget {budget} candidate visits)")]
    BudgetExceeded { budget: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Cap on candidate visits for the enumeration routines. Callers size
/// this to their patience; the default is desk scale.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_candidates: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_candidates: 1_000_000_000 }
    }
}

impl Budget {
    pub fn new(max_candidates: u64) -> Self {
        Budget { max_candidates }
    }
}
