use crate::element::Element;
use crate::oracle::InstrumentedOracle;
use crate::params::{check_k, ParamError};
use crate::scalar::Scalar;
use crate::solution::Solution;
use crate::stream::{StreamError, StreamingAlgorithm};

/// Streaming with preemption: a single set of at most `k` elements.
///
/// While the set has room, any element with positive gain joins it. Once
/// full, an arriving `u` replaces the member `s` maximising `f(S − s + u)`
/// if that swap improves `f(S)` by at least `f(S)/k`. One round per element;
/// at most `k` queries per element.
#[derive(Clone, Debug)]
pub struct PreemptionStreaming<T> {
    k: usize,
    members: Vec<Element<T>>,
    value: T,
    peak: usize,
}

impl<T: Scalar> PreemptionStreaming<T> {
    pub fn new(k: usize) -> Result<Self, ParamError> {
        check_k(k)?;
        Ok(PreemptionStreaming {
            k,
            members: Vec::new(),
            value: T::zero(),
            peak: 0,
        })
    }

    pub fn current(&self) -> Solution<T> {
        Solution {
            members: self.members.clone(),
            value: self.value,
        }
    }
}

impl<T: Scalar> StreamingAlgorithm<T> for PreemptionStreaming<T> {
    fn process(&mut self, oracle: &InstrumentedOracle<T>, e: Element<T>) -> Result<(), StreamError> {
        if self.members.len() < self.k {
            let mut q: Vec<&Element<T>> = self.members.iter().collect();
            q.push(&e);
            let v = oracle.eval(&q)?;
            if v - self.value > T::zero() {
                self.members.push(e);
                self.value = v;
            }
        } else {
            let queries: Vec<Vec<&Element<T>>> = (0..self.members.len())
                .map(|skip| {
                    let mut q: Vec<&Element<T>> = self
                        .members
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, m)| m)
                        .collect();
                    q.push(&e);
                    q
                })
                .collect();
            let values = oracle.eval_batch(&queries)?;
            drop(queries);
            let mut best: Option<(usize, T)> = None;
            for (j, v) in values.into_iter().enumerate() {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, v)) = best {
                if v - self.value >= self.value / T::of_usize(self.k) && v > self.value {
                    self.members.remove(j);
                    self.members.push(e);
                    self.value = v;
                }
            }
        }
        self.peak = self.peak.max(self.members.len());
        Ok(())
    }

    fn finish(&mut self, _oracle: &InstrumentedOracle<T>) -> Result<Solution<T>, StreamError> {
        Ok(self.current())
    }

    fn stored(&self) -> usize {
        self.members.len()
    }

    fn peak_stored(&self) -> usize {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::oracle::{Modular, Objective};
    use crate::stream::run_stream;

    fn oracle(k: usize) -> InstrumentedOracle<f64> {
        let f: Arc<dyn Objective<f64>> = Arc::new(Modular);
        InstrumentedOracle::new(f, k)
    }

    #[test]
    fn accepts_every_positive_gain_when_k_covers_stream() {
        let o = oracle(10);
        let mut p = PreemptionStreaming::new(10).unwrap();
        let weights = [0.5, 0.0, 3.0, 0.01, 2.0];
        let stream = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Element::weighted(i as u64, w));
        let sol = run_stream(&mut p, &o, stream).unwrap();
        assert_eq!(sol.ids(), vec![0, 2, 3, 4]);
    }

    #[test]
    fn memory_and_queries_bounded_by_k() {
        let k = 3;
        let o = oracle(k);
        let mut p = PreemptionStreaming::new(k).unwrap();
        for i in 0..40u64 {
            let before = o.counters();
            let w = ((i * 37) % 11) as f64 + 0.5;
            p.process(&o, Element::weighted(i, w)).unwrap();
            let d = o.counters() - before;
            assert!(d.queries <= k as u64);
            assert_eq!(d.rounds, 1);
            assert!(p.stored() <= k);
        }
        assert!(p.peak_stored() <= k);
    }

    #[test]
    fn swaps_in_a_much_better_element() {
        let o = oracle(2);
        let mut p = PreemptionStreaming::new(2).unwrap();
        for (i, w) in [1.0, 2.0, 10.0].into_iter().enumerate() {
            p.process(&o, Element::weighted(i as u64, w)).unwrap();
        }
        let sol = p.finish(&o).unwrap();
        assert_eq!(sol.value, 12.0);
        assert_eq!(sol.ids(), vec![1, 2]);
    }
}
