use thiserror::Error;

use crate::sarima::FittedModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: length {len}, need more than {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("bad lag polynomial: {0}")]
    BadPolynomial(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("non-stationary or non-invertible {0} polynomial")]
    NonStationary(&'static str),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("too few observations: {n} effective, need more than {needed}")]
    TooFewObservations { n: usize, needed: usize },

    #[error("optimizer diverged (best log-likelihood {loglik})")]
    OptimizerDiverged { loglik: f64, best: Option<Box<FittedModel>> },

    #[error("regressor matrix is singular")]
    SingularRegressors,

    #[error("every candidate order failed to fit")]
    AllFitsFailed,

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("too few residuals for bootstrap: {n}")]
    TooFewResiduals { n: usize },

    #[error("post-intervention period is empty")]
    EmptyPostPeriod,

    #[error("bad index: {0}")]
    BadIndex(String),

    #[error("configuration error: {0}")]
    Config(String),
}
