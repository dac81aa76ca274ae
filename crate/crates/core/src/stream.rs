//! Common driver surface for one-pass algorithms.

use thiserror::Error;

use crate::element::Element;
use crate::oracle::{InstrumentedOracle, OracleError};
use crate::params::ParamError;
use crate::scalar::Scalar;
use crate::solution::Solution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StreamError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("element {0} arrived after the stream was closed")]
    Closed(u64),
}

/// A single-pass algorithm fed one element at a time.
pub trait StreamingAlgorithm<T: Scalar> {
    fn process(&mut self, oracle: &InstrumentedOracle<T>, e: Element<T>) -> Result<(), StreamError>;

    /// Closes the stream and returns the selected set.
    fn finish(&mut self, oracle: &InstrumentedOracle<T>) -> Result<Solution<T>, StreamError>;

    /// Elements currently held (buffers and partial solutions).
    fn stored(&self) -> usize;

    fn peak_stored(&self) -> usize;
}

/// Feeds a whole stream and closes it.
pub fn run_stream<T, A, I>(
    algorithm: &mut A,
    oracle: &InstrumentedOracle<T>,
    stream: I,
) -> Result<Solution<T>, StreamError>
where
    T: Scalar,
    A: StreamingAlgorithm<T> + ?Sized,
    I: IntoIterator<Item = Element<T>>,
{
    for e in stream {
        algorithm.process(oracle, e)?;
    }
    algorithm.finish(oracle)
}
