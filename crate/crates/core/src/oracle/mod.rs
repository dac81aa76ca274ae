//! Set-function abstraction and the metered oracle the algorithms query.
//!
//! Cost model: every evaluation of `f` on one set is a *query*. A call that
//! issues several mutually independent queries at once ([`InstrumentedOracle::eval_batch`],
//! [`InstrumentedOracle::marginal`]) is one *adaptive round*; a single
//! [`InstrumentedOracle::eval`] is one query and one round.

mod coverage;
mod keywords;
mod logdet;
mod modular;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

pub use coverage::WeightedCoverage;
pub use keywords::KeywordCoverage;
pub use logdet::LogDet;
pub use modular::Modular;

use crate::element::{Element, PayloadKind};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("objective expects {expected} payloads, found {found} on element {id}")]
    MixedPayload {
        expected: PayloadKind,
        found: PayloadKind,
        id: u64,
    },
    #[error("query of {size} elements exceeds the feasibility cap {cap}")]
    Infeasible { size: usize, cap: usize },
    #[error("I + alpha*M is not numerically positive definite for a set of {size} vectors")]
    NotPositiveDefinite { size: usize },
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("universe item {0} has no weight")]
    UnknownUniverseItem(u32),
}

/// A non-negative monotone submodular set function.
///
/// Implementations are pure. `value` may assume every element carries the
/// payload kind returned by [`Objective::payload_kind`]; callers go through
/// [`evaluate`] or an [`InstrumentedOracle`], which check it.
pub trait Objective<T: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn payload_kind(&self) -> PayloadKind;

    fn value(&self, set: &[&Element<T>]) -> Result<T, OracleError>;
}

fn check_payloads<T: Scalar>(
    expected: PayloadKind,
    set: &[&Element<T>],
) -> Result<(), OracleError> {
    match set.iter().find(|e| e.kind() != expected) {
        Some(e) => Err(OracleError::MixedPayload {
            expected,
            found: e.kind(),
            id: e.id,
        }),
        None => Ok(()),
    }
}

/// Unmetered evaluation, used by reference solvers and tests.
pub fn evaluate<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    set: &[&Element<T>],
) -> Result<T, OracleError> {
    check_payloads(objective.payload_kind(), set)?;
    objective.value(set)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCounters {
    pub queries: u64,
    pub rounds: u64,
}

impl std::ops::Sub for OracleCounters {
    type Output = OracleCounters;

    fn sub(self, rhs: OracleCounters) -> OracleCounters {
        OracleCounters {
            queries: self.queries - rhs.queries,
            rounds: self.rounds - rhs.rounds,
        }
    }
}

/// Wraps an [`Objective`] and meters queries and adaptive rounds.
///
/// Counters are atomics, so the oracle can be shared across threads and the
/// counts stay exact. Queries larger than the feasibility cap are rejected
/// before anything is counted.
pub struct InstrumentedOracle<T: Scalar> {
    objective: Arc<dyn Objective<T>>,
    cap: Option<usize>,
    queries: AtomicU64,
    rounds: AtomicU64,
}

impl<T: Scalar> InstrumentedOracle<T> {
    /// Oracle whose queries are restricted to sets of at most `k` elements.
    pub fn new(objective: Arc<dyn Objective<T>>, k: usize) -> Self {
        InstrumentedOracle {
            objective,
            cap: Some(k),
            queries: AtomicU64::new(0),
            rounds: AtomicU64::new(0),
        }
    }

    pub fn uncapped(objective: Arc<dyn Objective<T>>) -> Self {
        InstrumentedOracle {
            objective,
            cap: None,
            queries: AtomicU64::new(0),
            rounds: AtomicU64::new(0),
        }
    }

    pub fn objective(&self) -> &Arc<dyn Objective<T>> {
        &self.objective
    }

    pub fn feasibility_cap(&self) -> Option<usize> {
        self.cap
    }

    pub fn counters(&self) -> OracleCounters {
        OracleCounters {
            queries: self.queries.load(Ordering::SeqCst),
            rounds: self.rounds.load(Ordering::SeqCst),
        }
    }

    fn admit(&self, set: &[&Element<T>]) -> Result<(), OracleError> {
        if let Some(cap) = self.cap {
            if set.len() > cap {
                return Err(OracleError::Infeasible {
                    size: set.len(),
                    cap,
                });
            }
        }
        check_payloads(self.objective.payload_kind(), set)
    }

    fn charge(&self, queries: u64) {
        self.queries.fetch_add(queries, Ordering::SeqCst);
        self.rounds.fetch_add(1, Ordering::SeqCst);
    }

    pub fn eval(&self, set: &[&Element<T>]) -> Result<T, OracleError> {
        self.admit(set)?;
        self.charge(1);
        self.objective.value(set)
    }

    /// Evaluates independent queries in one adaptive round.
    ///
    /// An empty batch returns an empty vector and leaves the counters alone.
    pub fn eval_batch<'a, Q>(&self, queries: &[Q]) -> Result<Vec<T>, OracleError>
    where
        Q: AsRef<[&'a Element<T>]>,
        T: 'a,
    {
        if queries.is_empty() {
            return Ok(Vec::new());
        }
        for q in queries {
            self.admit(q.as_ref())?;
        }
        self.charge(queries.len() as u64);
        queries
            .iter()
            .map(|q| self.objective.value(q.as_ref()))
            .collect()
    }

    /// `f(S ∪ {e}) − f(S)`, two queries in one round.
    pub fn marginal(&self, e: &Element<T>, set: &[&Element<T>]) -> Result<T, OracleError> {
        let mut extended: Vec<&Element<T>> = set.to_vec();
        if !set.iter().any(|x| x.id == e.id) {
            extended.push(e);
        }
        let values = self.eval_batch(&[extended.as_slice(), set])?;
        Ok(values[0] - values[1])
    }
}

impl<T: Scalar> std::fmt::Debug for InstrumentedOracle<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InstrumentedOracle")
            .field("objective", &self.objective.name())
            .field("cap", &self.cap)
            .field("counters", &self.counters())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular() -> Arc<dyn Objective<f64>> {
        Arc::new(Modular)
    }

    #[test]
    fn eval_counts_one_query_one_round() {
        let oracle = InstrumentedOracle::new(modular(), 3);
        let a = Element::weighted(1, 2.0);
        assert_eq!(oracle.eval(&[&a]).unwrap(), 2.0);
        assert_eq!(
            oracle.counters(),
            OracleCounters {
                queries: 1,
                rounds: 1
            }
        );
    }

    #[test]
    fn batch_counts_queries_and_single_round() {
        let oracle = InstrumentedOracle::new(modular(), 3);
        let e1 = Element::weighted(1, 2.0);
        let e2 = Element::weighted(2, 5.0);
        let qs: Vec<Vec<&Element<f64>>> = vec![vec![&e1], vec![&e2], vec![&e1, &e2]];
        assert_eq!(oracle.eval_batch(&qs).unwrap(), vec![2.0, 5.0, 7.0]);
        assert_eq!(oracle.counters().queries, 3);
        assert_eq!(oracle.counters().rounds, 1);
    }

    #[test]
    fn empty_sets_and_empty_batch() {
        let oracle = InstrumentedOracle::new(modular(), 3);
        let empty: Vec<&Element<f64>> = Vec::new();
        assert_eq!(
            oracle.eval_batch(&[empty.clone(), empty]).unwrap(),
            vec![0.0, 0.0]
        );
        let before = oracle.counters();
        let none: Vec<Vec<&Element<f64>>> = Vec::new();
        assert!(oracle.eval_batch(&none).unwrap().is_empty());
        assert_eq!(oracle.counters(), before);
    }

    #[test]
    fn marginal_is_two_queries_one_round() {
        let oracle = InstrumentedOracle::new(modular(), 3);
        let e = Element::weighted(9, 3.0);
        let s1 = Element::weighted(1, 1.5);
        assert_eq!(oracle.marginal(&e, &[&s1]).unwrap(), 3.0);
        assert_eq!(oracle.marginal(&e, &[&s1, &e]).unwrap(), 0.0);
        assert_eq!(
            oracle.counters(),
            OracleCounters {
                queries: 4,
                rounds: 2
            }
        );
    }

    #[test]
    fn feasibility_cap_rejects_without_counting() {
        let oracle = InstrumentedOracle::new(modular(), 1);
        let a = Element::weighted(1, 1.0);
        let b = Element::weighted(2, 1.0);
        assert_eq!(
            oracle.eval(&[&a, &b]),
            Err(OracleError::Infeasible { size: 2, cap: 1 })
        );
        assert_eq!(oracle.counters(), OracleCounters::default());
        let open = InstrumentedOracle::uncapped(modular());
        assert_eq!(open.eval(&[&a, &b]).unwrap(), 2.0);
    }

    #[test]
    fn mixed_payloads_rejected() {
        let oracle = InstrumentedOracle::new(modular(), 5);
        let a = Element::weighted(1, 1.0);
        let b = Element::coverage(2, vec![1]);
        let err = oracle.eval(&[&a, &b]).unwrap_err();
        assert!(matches!(err, OracleError::MixedPayload { id: 2, .. }));
    }
}
