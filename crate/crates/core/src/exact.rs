//! Reference solvers for small instances.
//!
//! Both solvers evaluate the objective directly, never through an
//! [`InstrumentedOracle`](crate::oracle::InstrumentedOracle), so they do not
//! disturb the metrics of the run they check.

use thiserror::Error;

use crate::element::Element;
use crate::oracle::{evaluate, Objective, OracleError};
use crate::scalar::Scalar;
use crate::solution::Solution;

/// Largest ground set [`brute_force_opt`] accepts.
pub const MAX_BRUTE_FORCE: usize = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("ground set of {0} elements is too large to enumerate (limit {MAX_BRUTE_FORCE})")]
    GroundTooLarge(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult<T> {
    pub opt_set: Vec<Element<T>>,
    pub opt_value: T,
}

impl<T: Scalar> ExactResult<T> {
    /// The ideal sieve threshold `OPT / 2k`.
    pub fn ideal_threshold(&self, k: usize) -> T {
        self.opt_value / T::of_usize(2 * k.max(1))
    }
}

/// Exhaustive maximum of `f` over all subsets of size at most `k`.
///
/// Subsets are visited in lexicographic order of their sorted id sequences
/// and only a strict improvement replaces the incumbent, so ties resolve to
/// the lexicographically smallest set.
pub fn brute_force_opt<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    ground: &[Element<T>],
    k: usize,
) -> Result<ExactResult<T>, ExactError> {
    if ground.len() > MAX_BRUTE_FORCE {
        return Err(ExactError::GroundTooLarge(ground.len()));
    }
    let mut sorted: Vec<&Element<T>> = ground.iter().collect();
    sorted.sort_by_key(|e| e.id);

    let empty: [&Element<T>; 0] = [];
    let mut best_value = evaluate(objective, &empty)?;
    let mut best: Vec<&Element<T>> = Vec::new();

    // depth-first preorder over index sequences is lexicographic order
    let mut stack: Vec<usize> = Vec::new();
    let mut current: Vec<&Element<T>> = Vec::new();
    let mut next = 0usize;
    loop {
        if current.len() < k && next < sorted.len() {
            current.push(sorted[next]);
            stack.push(next);
            let v = evaluate(objective, &current)?;
            if v > best_value {
                best_value = v;
                best = current.clone();
            }
            next += 1;
        } else {
            match stack.pop() {
                Some(last) => {
                    current.pop();
                    next = last + 1;
                }
                None => break,
            }
        }
    }

    Ok(ExactResult {
        opt_set: best.into_iter().cloned().collect(),
        opt_value: best_value,
    })
}

/// Classic greedy: `k` rounds of adding the element with the largest
/// marginal gain, smallest id on ties, stopping early once no gain is
/// positive.
pub fn greedy<T: Scalar, O: Objective<T> + ?Sized>(
    objective: &O,
    ground: &[Element<T>],
    k: usize,
) -> Result<Solution<T>, OracleError> {
    let mut candidates: Vec<&Element<T>> = ground.iter().collect();
    candidates.sort_by_key(|e| e.id);

    let mut chosen: Vec<&Element<T>> = Vec::new();
    let mut value = evaluate(objective, &chosen)?;
    for _ in 0..k {
        let mut best: Option<(usize, T)> = None;
        for (idx, cand) in candidates.iter().enumerate() {
            chosen.push(cand);
            let v = evaluate(objective, &chosen)?;
            chosen.pop();
            let gain = v - value;
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((idx, gain));
            }
        }
        match best {
            Some((idx, gain)) if gain > T::zero() => {
                chosen.push(candidates.remove(idx));
                value = value + gain;
            }
            _ => break,
        }
    }
    let value = evaluate(objective, &chosen)?;
    Ok(Solution {
        members: chosen.into_iter().cloned().collect(),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Modular, WeightedCoverage};

    fn coverage_instance() -> (WeightedCoverage<f64>, Vec<Element<f64>>) {
        (
            WeightedCoverage::unit(5),
            vec![
                Element::coverage(1, vec![1, 2]),
                Element::coverage(2, vec![3]),
                Element::coverage(3, vec![1, 3, 4]),
            ],
        )
    }

    /// Independent check: every subset as a bitmask.
    fn enumerate_masks(f: &WeightedCoverage<f64>, ground: &[Element<f64>], k: usize) -> f64 {
        let n = ground.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize <= k)
            .map(|m| {
                let set: Vec<&Element<f64>> =
                    (0..n).filter(|i| m & (1 << i) != 0).map(|i| &ground[i]).collect();
                evaluate(f, &set).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn brute_force_coverage_example() {
        let (f, ground) = coverage_instance();
        assert_eq!(enumerate_masks(&f, &ground, 2), 4.0);
        let r = brute_force_opt(&f, &ground, 2).unwrap();
        assert_eq!(r.opt_value, 4.0);
        let ids: Vec<u64> = r.opt_set.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![1, 3]);
    }

    #[test]
    fn brute_force_k_zero_and_modular() {
        let (f, ground) = coverage_instance();
        let r = brute_force_opt(&f, &ground, 0).unwrap();
        assert!(r.opt_set.is_empty());
        assert_eq!(r.opt_value, 0.0);

        let ground = vec![
            Element::weighted(1, 2.0),
            Element::weighted(2, 5.0),
            Element::weighted(3, 1.0),
        ];
        assert_eq!(brute_force_opt(&Modular, &ground, 2).unwrap().opt_value, 7.0);
    }

    #[test]
    fn brute_force_guard() {
        let ground: Vec<Element<f64>> = (0..23).map(|i| Element::weighted(i, 1.0)).collect();
        assert_eq!(
            brute_force_opt(&Modular, &ground, 2),
            Err(ExactError::GroundTooLarge(23))
        );
    }

    #[test]
    fn greedy_trace() {
        let (f, ground) = coverage_instance();
        let s = greedy(&f, &ground, 2).unwrap();
        assert_eq!(s.ids(), vec![3, 1]);
        assert_eq!(s.value, 4.0);
        assert!(greedy(&f, &ground, 0).unwrap().is_empty());
    }

    #[test]
    fn greedy_modular_takes_positive_weights() {
        let ground = vec![
            Element::weighted(1, 2.0),
            Element::weighted(2, 0.0),
            Element::weighted(3, 1.0),
        ];
        let s = greedy(&Modular, &ground, 3).unwrap();
        assert_eq!(s.ids(), vec![1, 3]);
    }
}
