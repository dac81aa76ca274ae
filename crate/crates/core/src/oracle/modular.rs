use crate::element::{Element, Payload, PayloadKind};
use crate::scalar::Scalar;

use super::{Objective, OracleError};

/// `f(S) = Σ_{e∈S} weight(e)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Modular;

impl<T: Scalar> Objective<T> for Modular {
    fn name(&self) -> &'static str {
        "modular"
    }

    fn payload_kind(&self) -> PayloadKind {
        PayloadKind::Weighted
    }

    fn value(&self, set: &[&Element<T>]) -> Result<T, OracleError> {
        Ok(set
            .iter()
            .map(|e| match &e.payload {
                Payload::Weighted(w) => w.weight,
                _ => T::zero(),
            })
            .sum())
    }
}
