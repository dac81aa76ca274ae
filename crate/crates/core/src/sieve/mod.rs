//! Single-source threshold sieves.
//!
//! Both variants keep one partial solution per threshold `τ = (1+ε)^i` and
//! add an element to `S_τ` when `|S_τ| < k` and its marginal gain is at least
//! `τ`. They differ only in the lowest threshold kept:
//!
//! * [`SieveVariant::Classic`] keeps `τ ≥ Δ/2k`, where `Δ` is the largest
//!   singleton value seen so far.
//! * [`SieveVariant::PlusPlus`] keeps `τ ≥ max(LB, Δ)/2k`, where `LB` is the
//!   best partial solution value. Since a bucket with threshold `τ` holds at
//!   most `LB/τ` elements, the live buckets shrink geometrically and total
//!   memory is `O(k/ε)` instead of `O(k log k / ε)`.
//!
//! Each element costs two adaptive rounds: its singleton value (which moves
//! `Δ` and therefore the grid), then one batch with a query per non-full
//! bucket. Bucket values are cached, so a marginal gain is one query.

mod preemption;

use std::collections::BTreeMap;

pub use preemption::PreemptionStreaming;

use crate::element::Element;
use crate::grid::ThresholdGrid;
use crate::oracle::InstrumentedOracle;
use crate::params::{check_k, ParamError};
use crate::scalar::{max, Scalar};
use crate::solution::Solution;
use crate::stream::{StreamError, StreamingAlgorithm};

/// Partial solution for one threshold.
#[derive(Clone, Debug)]
pub struct ThresholdBucket<T> {
    pub exponent: i32,
    pub tau: T,
    pub members: Vec<Element<T>>,
    /// Cached `f(members)`.
    pub value: T,
}

impl<T: Scalar> ThresholdBucket<T> {
    pub fn new(exponent: i32, grid: &ThresholdGrid<T>) -> Self {
        ThresholdBucket {
            exponent,
            tau: grid.tau(exponent),
            members: Vec::new(),
            value: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn push(&mut self, e: Element<T>, new_value: T) {
        self.members.push(e);
        self.value = new_value;
    }

    pub fn solution(&self) -> Solution<T> {
        Solution {
            members: self.members.clone(),
            value: self.value,
        }
    }
}

/// Δ, LB, τ_min and the live buckets keyed by exponent.
#[derive(Clone, Debug)]
pub struct SieveState<T> {
    pub delta: T,
    pub lb: T,
    pub tau_min: T,
    pub buckets: BTreeMap<i32, ThresholdBucket<T>>,
    pub k: usize,
    pub grid: ThresholdGrid<T>,
}

impl<T: Scalar> SieveState<T> {
    pub fn new(k: usize, epsilon: T) -> Result<Self, ParamError> {
        check_k(k)?;
        Ok(SieveState {
            delta: T::zero(),
            lb: T::zero(),
            tau_min: T::zero(),
            buckets: BTreeMap::new(),
            k,
            grid: ThresholdGrid::new(epsilon)?,
        })
    }

    pub fn epsilon(&self) -> T {
        self.grid.epsilon()
    }

    /// Σ|S_τ| over live buckets.
    pub fn stored(&self) -> usize {
        self.buckets.values().map(ThresholdBucket::len).sum()
    }

    pub(crate) fn discard_below(&mut self, tau_min: T) {
        self.buckets.retain(|_, b| b.tau >= tau_min);
    }

    pub(crate) fn ensure_bucket(&mut self, exponent: i32) -> &mut ThresholdBucket<T> {
        let grid = self.grid;
        self.buckets
            .entry(exponent)
            .or_insert_with(|| ThresholdBucket::new(exponent, &grid))
    }

    pub(crate) fn refresh_lb(&mut self) {
        self.lb = self
            .buckets
            .values()
            .fold(self.lb, |acc, b| max(acc, b.value));
    }

    /// Highest-value bucket, smallest exponent on ties; empty when no bucket
    /// exists.
    pub fn best(&self) -> Solution<T> {
        let mut best: Option<&ThresholdBucket<T>> = None;
        for b in self.buckets.values() {
            if best.is_none_or(|cur| b.value > cur.value) {
                best = Some(b);
            }
        }
        best.map_or_else(Solution::empty, ThresholdBucket::solution)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SieveVariant {
    /// Sieve-Streaming: the grid floor follows Δ only.
    Classic,
    /// Sieve-Streaming++: the grid floor also follows the best solution.
    PlusPlus,
}

#[derive(Clone, Debug)]
pub struct SieveStreaming<T> {
    variant: SieveVariant,
    state: SieveState<T>,
    peak: usize,
    peak_live: usize,
}

impl<T: Scalar> SieveStreaming<T> {
    pub fn new(variant: SieveVariant, k: usize, epsilon: T) -> Result<Self, ParamError> {
        Ok(SieveStreaming {
            variant,
            state: SieveState::new(k, epsilon)?,
            peak: 0,
            peak_live: 0,
        })
    }

    pub fn plus_plus(k: usize, epsilon: T) -> Result<Self, ParamError> {
        Self::new(SieveVariant::PlusPlus, k, epsilon)
    }

    pub fn classic(k: usize, epsilon: T) -> Result<Self, ParamError> {
        Self::new(SieveVariant::Classic, k, epsilon)
    }

    pub fn variant(&self) -> SieveVariant {
        self.variant
    }

    pub fn state(&self) -> &SieveState<T> {
        &self.state
    }

    /// High-water mark of Σ|S_τ| over buckets at or above the floor the next
    /// arrival will apply (`max(LB, Δ)/(2k)`, or `Δ/(2k)` for the classic sieve).
    /// Buckets below that floor are never queried again and are dropped on
    /// the next arrival, so this is the retained set between arrivals.
    pub fn peak_live(&self) -> usize {
        self.peak_live
    }

    /// The current best bucket.
    pub fn finalize(&self) -> Solution<T> {
        self.state.best()
    }
}

impl<T: Scalar> StreamingAlgorithm<T> for SieveStreaming<T> {
    fn process(&mut self, oracle: &InstrumentedOracle<T>, e: Element<T>) -> Result<(), StreamError> {
        let singleton = oracle.eval(&[&e])?;
        let st = &mut self.state;
        st.delta = max(st.delta, singleton);

        let two_k = T::of_usize(2 * st.k);
        st.tau_min = match self.variant {
            SieveVariant::PlusPlus => max(st.lb, st.delta) / two_k,
            SieveVariant::Classic => st.delta / two_k,
        };
        st.discard_below(st.tau_min);

        let lower = st.tau_min / st.grid.base();
        let exponents: Vec<i32> = st.grid.exponents(lower, st.delta).collect();
        for &i in &exponents {
            st.ensure_bucket(i);
        }

        let open: Vec<i32> = exponents
            .iter()
            .copied()
            .filter(|i| st.buckets[i].len() < st.k)
            .collect();
        let queries: Vec<Vec<&Element<T>>> = open
            .iter()
            .map(|i| {
                let mut q: Vec<&Element<T>> = st.buckets[i].members.iter().collect();
                q.push(&e);
                q
            })
            .collect();
        let values = oracle.eval_batch(&queries)?;
        drop(queries);

        for (i, v) in open.into_iter().zip(values) {
            let bucket = st.buckets.get_mut(&i).expect("bucket created above");
            if v - bucket.value >= bucket.tau {
                bucket.push(e.clone(), v);
                st.lb = max(st.lb, v);
            }
        }

        self.peak = self.peak.max(st.stored());
        let floor = match self.variant {
            SieveVariant::PlusPlus => max(st.lb, st.delta) / two_k,
            SieveVariant::Classic => st.delta / two_k,
        };
        let live: usize = st
            .buckets
            .values()
            .filter(|b| b.tau >= floor)
            .map(ThresholdBucket::len)
            .sum();
        self.peak_live = self.peak_live.max(live);
        Ok(())
    }

    fn finish(&mut self, _oracle: &InstrumentedOracle<T>) -> Result<Solution<T>, StreamError> {
        Ok(self.finalize())
    }

    fn stored(&self) -> usize {
        self.state.stored()
    }

    fn peak_stored(&self) -> usize {
        self.peak
    }
}

/// Upper bound on Σ|S_τ| for Sieve-Streaming++:
/// `⌈k ln 2 / ε⌉ + Σ_{i=0}^{⌈log_{1+ε} k⌉} k / (1+ε)^i`.
pub fn sievepp_memory_bound(k: usize, epsilon: f64) -> f64 {
    let kf = k as f64;
    let head = (kf * 2f64.ln() / epsilon).ceil();
    let top = (kf.ln() / (1.0 + epsilon).ln()).ceil().max(0.0) as i32;
    let tail: f64 = (0..=top).map(|i| kf / (1.0 + epsilon).powi(i)).sum();
    head + tail
}

/// Per-element query bound for either sieve: `⌈log_{1+ε}(2k(1+ε)²)⌉ + 1`.
pub fn sieve_query_bound(k: usize, epsilon: f64) -> u64 {
    let base = 1.0 + epsilon;
    let arg = 2.0 * k as f64 * base * base;
    (arg.ln() / base.ln()).ceil() as u64 + 1
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
    fn hand_trace_two_elements() {
        let o = oracle(1);
        let mut s = SieveStreaming::plus_plus(1, 0.5).unwrap();
        s.process(&o, Element::weighted(1, 1.0)).unwrap();
        let exps: Vec<i32> = s.state().buckets.keys().copied().collect();
        assert_eq!(exps, vec![-2, -1, 0]);
        let taus: Vec<f64> = s.state().buckets.values().map(|b| b.tau).collect();
        let expected = [4.0 / 9.0, 2.0 / 3.0, 1.0];
        for (t, x) in taus.iter().zip(expected) {
            assert!((t - x).abs() < 1e-12);
        }
        assert_eq!(s.state().lb, 1.0);

        s.process(&o, Element::weighted(2, 10.0)).unwrap();
        assert_eq!(s.state().tau_min, 5.0);
        let exps: Vec<i32> = s.state().buckets.keys().copied().collect();
        assert_eq!(exps, vec![3, 4, 5]);
        let taus: Vec<f64> = s.state().buckets.values().map(|b| b.tau).collect();
        for (t, x) in taus.iter().zip([3.375, 5.0625, 7.59375]) {
            assert!((t - x).abs() < 1e-12);
        }
        for b in s.state().buckets.values() {
            assert_eq!(b.members.len(), 1);
            assert_eq!(b.members[0].id, 2);
        }
        let sol = s.finish(&o).unwrap();
        assert_eq!(sol.value, 10.0);
        assert_eq!(sol.ids(), vec![2]);
        assert_eq!(s.peak_stored(), 3);
    }

    #[test]
    fn zero_stream_stores_nothing() {
        for variant in [SieveVariant::Classic, SieveVariant::PlusPlus] {
            let o = oracle(3);
            let mut s = SieveStreaming::new(variant, 3, 0.2).unwrap();
            let stream = (0..10).map(|i| Element::weighted(i, 0.0));
            let sol = run_stream(&mut s, &o, stream).unwrap();
            assert!(sol.is_empty());
            assert_eq!(sol.value, 0.0);
            assert_eq!(s.peak_stored(), 0);
            assert!(s.state().buckets.is_empty());
        }
    }

    #[test]
    fn single_element_is_returned() {
        for k in [1, 2, 5] {
            let o = oracle(k);
            let mut s = SieveStreaming::plus_plus(k, 0.3).unwrap();
            let sol = run_stream(&mut s, &o, [Element::weighted(7, 2.5)]).unwrap();
            assert_eq!(sol.ids(), vec![7]);
            assert_eq!(sol.value, 2.5);
        }
    }

    #[test]
    fn empty_stream_finalizes_empty() {
        let s = SieveStreaming::<f64>::plus_plus(2, 0.3).unwrap();
        assert!(s.finalize().is_empty());
        assert_eq!(s.finalize().value, 0.0);
    }

    #[test]
    fn classic_never_prunes_on_lb() {
        let o = oracle(1);
        let mut s = SieveStreaming::classic(1, 0.5).unwrap();
        s.process(&o, Element::weighted(1, 1.0)).unwrap();
        s.process(&o, Element::weighted(2, 1.0)).unwrap();
        // Δ/2 = 0.5 drops exponent −2, which the grid's lower edge recreates
        let exps: Vec<i32> = s.state().buckets.keys().copied().collect();
        assert_eq!(exps, vec![-2, -1, 0]);
        assert_eq!(s.state().buckets[&-2].members[0].id, 2);
        assert_eq!(s.state().buckets[&0].members[0].id, 1);
        let mut pp = SieveStreaming::plus_plus(1, 0.5).unwrap();
        pp.process(&o, Element::weighted(1, 1.0)).unwrap();
        pp.process(&o, Element::weighted(2, 1.0)).unwrap();
        assert_eq!(pp.state().tau_min, 0.5);
    }

    #[test]
    fn two_rounds_per_element() {
        let o = oracle(2);
        let mut s = SieveStreaming::plus_plus(2, 0.25).unwrap();
        let weights = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0];
        for (i, w) in weights.iter().enumerate() {
            let before = o.counters();
            s.process(&o, Element::weighted(i as u64, *w)).unwrap();
            let d = o.counters() - before;
            assert_eq!(d.rounds, 2);
            assert!(d.queries <= sieve_query_bound(2, 0.25));
        }
    }

    #[test]
    fn live_peak_never_exceeds_raw_peak() {
        let o = oracle(2);
        let mut s = SieveStreaming::plus_plus(2, 0.1).unwrap();
        for (i, w) in [1.0, 8.0, 0.5, 30.0, 2.0, 2.0, 90.0].iter().enumerate() {
            s.process(&o, Element::weighted(i as u64, *w)).unwrap();
            assert!(s.peak_live() <= s.peak_stored());
        }
        assert!(s.peak_live() as f64 <= sievepp_memory_bound(2, 0.1));
        assert!(s.peak_live() < s.peak_stored());
    }

    #[test]
    fn memory_bound_formula() {
        // ⌈1·ln2/0.5⌉ + 1 = 2 + 1
        assert!((sievepp_memory_bound(1, 0.5) - 3.0).abs() < 1e-12);
        let b = sievepp_memory_bound(50, 0.1);
        assert!(b > 800.0 && b < 950.0, "{b}");
    }
}
