use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("cardinality k must be at least 1")]
    ZeroK,
    #[error("buffer capacity must be at least 1")]
    ZeroCapacity,
    #[error("trigger fraction must lie in (0, 1], got {0}")]
    Trigger(f64),
    #[error("ladder length R must be at least 1")]
    ZeroLadder,
    #[error("at least one source stream is required")]
    NoSources,
    #[error("threshold must be positive and finite, got {0}")]
    Threshold(f64),
}

pub(crate) fn check_epsilon<T: Scalar>(epsilon: T) -> Result<(), ParamError> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(ParamError::Epsilon(epsilon.as_f64()))
    }
}

pub(crate) fn check_k(k: usize) -> Result<(), ParamError> {
    if k == 0 {
        Err(ParamError::ZeroK)
    } else {
        Ok(())
    }
}
