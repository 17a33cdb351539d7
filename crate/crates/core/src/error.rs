use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate t = {t} lies below the end's left endpoint t0 = {t0}")]
    Domain { t: f64, t0: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite potential value at grid point {index} (t = {t})")]
    NonFinitePotential { index: usize, t: f64 },

    #[error("field is bounded, so the essential spectrum is nonempty and mode sums at lambda = {lambda} can diverge")]
    BoundedField { lambda: f64 },

    #[error("field is bounded; {what} is infinite")]
    InfiniteIntegral { what: &'static str },

    #[error("holonomy undefined for unbounded field")]
    HolonomyUndefined,

    #[error("end {index} carries a non-constant field")]
    NonConstantField { index: usize },

    #[error("requested {k} eigenvalues from an operator of size {n}")]
    TooManyEigenvalues { k: usize, n: usize },

    #[error("grid is empty")]
    EmptyGrid,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
