use std::collections::HashMap;

use crate::element::{Element, Payload, PayloadKind};
use crate::scalar::Scalar;

use super::{Objective, OracleError};

/// Weighted set coverage: the total weight of the union of covered items.
#[derive(Clone, Debug)]
pub struct WeightedCoverage<T> {
    weights: HashMap<u32, T>,
}

impl<T: Scalar> WeightedCoverage<T> {
    pub fn new(weights: HashMap<u32, T>) -> Self {
        WeightedCoverage { weights }
    }

    /// Every item in `0..universe` with weight one.
    pub fn unit(universe: u32) -> Self {
        WeightedCoverage {
            weights: (0..universe).map(|i| (i, T::one())).collect(),
        }
    }

    pub fn weights(&self) -> &HashMap<u32, T> {
        &self.weights
    }
}

impl<T: Scalar> Objective<T> for WeightedCoverage<T> {
    fn name(&self) -> &'static str {
        "coverage"
    }

    fn payload_kind(&self) -> PayloadKind {
        PayloadKind::Coverage
    }

    fn value(&self, set: &[&Element<T>]) -> Result<T, OracleError> {
        let mut items: Vec<u32> = set
            .iter()
            .filter_map(|e| match &e.payload {
                Payload::Coverage(c) => Some(c.covered.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect();
        items.sort_unstable();
        items.dedup();
        items.iter().try_fold(T::zero(), |acc, id| {
            self.weights
                .get(id)
                .map(|&w| acc + w)
                .ok_or(OracleError::UnknownUniverseItem(*id))
        })
    }
}
