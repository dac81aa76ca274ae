use crate::element::{Element, KeywordId, Payload, PayloadKind};
use crate::scalar::Scalar;

use super::{Objective, OracleError};

/// Square-root keyword coverage: `f(S) = Σ_w sqrt(Σ_{e∈S} score(w, e))`,
/// where `score(w, e)` is the bag value of `e` when `w` is one of its
/// keywords and zero otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct KeywordCoverage;

impl<T: Scalar> Objective<T> for KeywordCoverage {
    fn name(&self) -> &'static str {
        "keywords"
    }

    fn payload_kind(&self) -> PayloadKind {
        PayloadKind::Keywords
    }

    fn value(&self, set: &[&Element<T>]) -> Result<T, OracleError> {
        let mut scores: Vec<(KeywordId, T)> = Vec::new();
        for e in set {
            if let Payload::Keywords(bag) = &e.payload {
                scores.extend(bag.keywords.iter().map(|&w| (w, bag.value)));
            }
        }
        // stable: per-keyword sums accumulate in set order
        scores.sort_by_key(|&(w, _)| w);

        let mut total = T::zero();
        let mut i = 0;
        while i < scores.len() {
            let word = scores[i].0;
            let mut acc = T::zero();
            while i < scores.len() && scores[i].0 == word {
                acc = acc + scores[i].1;
                i += 1;
            }
            total = total + acc.sqrt();
        }
        Ok(total)
    }
}
