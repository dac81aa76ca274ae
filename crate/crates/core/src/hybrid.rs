//! Buffered sieve streaming.
//!
//! Elements are staged in a buffer; once it reaches the trigger fill, the
//! whole buffer is processed against every live threshold at once:
//!
//! * `Δ` absorbs the largest singleton of the buffer (one round);
//! * `τ_min = max(LB, Δ) / (2k(1+ε))` and buckets below it are dropped;
//! * for every `τ = (1+ε)^i` in `[τ_min, Δ]`, ascending, an inner sampler
//!   extends `S_τ` from the buffer with budget `k − |S_τ|`;
//! * `LB` is refreshed once from the bucket values and the buffer cleared.
//!
//! Thresholds extend disjoint sets, so their samplers run side by side: a
//! flush costs one round for the singleton scan plus the rounds of its
//! longest threshold ([`FlushEvent::rounds`]).
//!
//! The inner sampler is either [threshold sampling](crate::sampling)
//! (Batch-Sieve-Streaming++) or the one-pick-per-filter baseline
//! (Sample-One-Streaming). A partially filled buffer is flushed when the
//! stream closes.

use rand::Rng;

use crate::element::Element;
use crate::oracle::{InstrumentedOracle, OracleError};
use crate::params::{check_k, ParamError};
use crate::rng::{purpose, rng_for};
use crate::sampling::{self, CandidatePool, SamplingOutcome, SamplingParams, VecPool};
use crate::scalar::{max, Scalar};
use crate::sieve::SieveState;
use crate::solution::Solution;
use crate::stream::{StreamError, StreamingAlgorithm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BufferConfig {
    pub capacity: usize,
    pub trigger_fraction: f64,
}

impl Default for BufferConfig {
    fn default() -> Self {
        BufferConfig {
            capacity: 100,
            trigger_fraction: 0.8,
        }
    }
}

impl BufferConfig {
    pub fn new(capacity: usize, trigger_fraction: f64) -> Result<Self, ParamError> {
        let c = BufferConfig {
            capacity,
            trigger_fraction,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.capacity == 0 {
            return Err(ParamError::ZeroCapacity);
        }
        if !(self.trigger_fraction > 0.0 && self.trigger_fraction <= 1.0) {
            return Err(ParamError::Trigger(self.trigger_fraction));
        }
        Ok(())
    }

    /// Fill level at which a flush fires, `⌈capacity × trigger⌉`.
    pub fn trigger_len(&self) -> usize {
        ((self.capacity as f64 * self.trigger_fraction).ceil() as usize).clamp(1, self.capacity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerSampler {
    /// Threshold sampling; `ladder > 1` collapses that many batch steps per round.
    Threshold { ladder: usize },
    /// One filter round, then one uniformly random survivor, repeated.
    SampleOne,
}

impl InnerSampler {
    pub fn threshold() -> Self {
        InnerSampler::Threshold { ladder: 1 }
    }
}

/// What one flush did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlushEvent {
    pub index: u64,
    /// Stream whose buffer fired the trigger, for multi-source runs.
    pub trigger_source: Option<u32>,
    pub buffered: usize,
    pub delta: f64,
    pub tau_min: f64,
    pub exponents: Vec<i32>,
    /// Elements added per exponent.
    pub picks: Vec<(i32, usize)>,
    /// Elements drawn by the samplers (machine-to-center transfers).
    pub sampled: usize,
    pub wasted: usize,
    pub insertions: usize,
    /// Outer filter iterations summed over thresholds.
    pub iterations: usize,
    /// Logical rounds: the singleton scan plus the longest threshold, since
    /// thresholds touch disjoint sets and run side by side.
    pub rounds: u64,
    /// Oracle calls issued one threshold after another.
    pub sequential_rounds: u64,
}

impl std::fmt::Display for FlushEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "flush={} source=", self.index)?;
        match self.trigger_source {
            Some(s) => write!(f, "{s}")?,
            None => f.write_str("-")?,
        }
        write!(
            f,
            " buffered={} delta={} tau_min={} exponents=",
            self.buffered, self.delta, self.tau_min
        )?;
        match (self.exponents.first(), self.exponents.last()) {
            (Some(lo), Some(hi)) => write!(f, "{lo}..={hi}")?,
            _ => f.write_str("none")?,
        }
        f.write_str(" picks=")?;
        let picks: Vec<String> = self
            .picks
            .iter()
            .filter(|(_, n)| *n > 0)
            .map(|(i, n)| format!("{i}:{n}"))
            .collect();
        f.write_str(if picks.is_empty() { "-" } else { "" })?;
        f.write_str(&picks.join(","))?;
        write!(
            f,
            " sampled={} wasted={} insertions={} iterations={} rounds={} sequential_rounds={}",
            self.sampled,
            self.wasted,
            self.insertions,
            self.iterations,
            self.rounds,
            self.sequential_rounds
        )
    }
}

/// Processes one buffer against the sieve state. `make_pool` produces a fresh
/// candidate pool over the buffer for every threshold.
pub(crate) fn flush_buffer<T, P, F>(
    state: &mut SieveState<T>,
    oracle: &InstrumentedOracle<T>,
    buffered: &[&Element<T>],
    mut make_pool: F,
    sampler: InnerSampler,
    seed: u64,
    index: u64,
) -> Result<FlushEvent, OracleError>
where
    T: Scalar,
    P: CandidatePool<T>,
    F: FnMut() -> P,
{
    let start_rounds = oracle.counters().rounds;
    let singletons: Vec<[&Element<T>; 1]> = buffered.iter().map(|&e| [e]).collect();
    let values = oracle.eval_batch(&singletons)?;
    state.delta = values.into_iter().fold(state.delta, max);

    let k = state.k;
    let eps = state.epsilon();
    state.tau_min = max(state.lb, state.delta) / (T::of_usize(2 * k) * (T::one() + eps));
    state.discard_below(state.tau_min);

    let exponents: Vec<i32> = state.grid.exponents(state.tau_min, state.delta).collect();
    let mut event = FlushEvent {
        index,
        buffered: buffered.len(),
        delta: state.delta.as_f64(),
        tau_min: state.tau_min.as_f64(),
        exponents: exponents.clone(),
        ..FlushEvent::default()
    };

    let mut longest = 0;
    for &i in &exponents {
        let bucket = state.ensure_bucket(i);
        if bucket.len() >= k {
            continue;
        }
        let mut rng = rng_for(seed, &[purpose::SAMPLING, index, i as i64 as u64]);
        let mut pool = make_pool();
        let members = std::mem::take(&mut bucket.members);
        let params = SamplingParams::new(bucket.tau, k - members.len(), eps)
            .expect("threshold and budget validated by the sieve state");
        let before = oracle.counters().rounds;
        let outcome = match sampler {
            InnerSampler::Threshold { ladder } => sampling::run(
                oracle,
                &members,
                bucket.value,
                &mut pool,
                &params.with_ladder(ladder.max(1)).expect("ladder at least one"),
                &mut rng,
            ),
            InnerSampler::SampleOne => {
                sample_one(oracle, &members, bucket.value, &mut pool, &params, &mut rng)
            }
        };
        bucket.members = members;
        longest = longest.max(oracle.counters().rounds - before);
        let outcome = outcome?;
        event.sampled += outcome.sampled;
        event.wasted += outcome.wasted;
        event.iterations += outcome.iterations;
        event.insertions += outcome.picked.len();
        event.picks.push((i, outcome.picked.len()));
        bucket.members.extend(outcome.picked);
        bucket.value = outcome.value;
    }

    state.refresh_lb();
    event.sequential_rounds = oracle.counters().rounds - start_rounds;
    event.rounds = 1 + longest;
    Ok(event)
}

/// Sample-One inner loop: filter the pool against the current picks, add one
/// uniformly random survivor, repeat until the budget is spent or nothing
/// survives. One round per pick.
pub fn sample_one<T, P, R>(
    oracle: &InstrumentedOracle<T>,
    base: &[Element<T>],
    base_value: T,
    pool: &mut P,
    params: &SamplingParams<T>,
    rng: &mut R,
) -> Result<SamplingOutcome<T>, OracleError>
where
    T: Scalar,
    P: CandidatePool<T> + ?Sized,
    R: Rng + ?Sized,
{
    let mut picked: Vec<Element<T>> = Vec::new();
    let mut value = base_value;
    let mut iterations = 0;
    while picked.len() < params.k_remaining && !pool.is_empty() {
        iterations += 1;
        let values = {
            let candidates = pool.candidates();
            let queries: Vec<Vec<&Element<T>>> = candidates
                .iter()
                .map(|&x| base.iter().chain(picked.iter()).chain(std::iter::once(x)).collect())
                .collect();
            oracle.eval_batch(&queries)?
        };
        let keep: Vec<bool> = values.iter().map(|&v| v - value >= params.tau).collect();
        let survivors: Vec<T> = values
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(&v, _)| v)
            .collect();
        pool.retain_mask(&keep);
        if pool.is_empty() {
            break;
        }
        let idx = rng.random_range(0..pool.len());
        picked.extend(pool.take(&[idx]));
        value = survivors[idx];
    }
    let sampled = picked.len();
    Ok(SamplingOutcome {
        picked,
        value,
        iterations,
        sampled,
        wasted: 0,
        trace: Vec::new(),
    })
}

/// Batch-Sieve-Streaming++ (and, with [`InnerSampler::SampleOne`], the
/// Sample-One-Streaming baseline) on a single machine.
#[derive(Clone, Debug)]
pub struct BatchSieveStreaming<T> {
    state: SieveState<T>,
    buffer: Vec<Element<T>>,
    config: BufferConfig,
    sampler: InnerSampler,
    seed: u64,
    flushes: u64,
    peak: usize,
    closed: bool,
    events: Vec<FlushEvent>,
}

impl<T: Scalar> BatchSieveStreaming<T> {
    pub fn new(
        k: usize,
        epsilon: T,
        config: BufferConfig,
        sampler: InnerSampler,
        seed: u64,
    ) -> Result<Self, ParamError> {
        check_k(k)?;
        config.validate()?;
        if let InnerSampler::Threshold { ladder: 0 } = sampler {
            return Err(ParamError::ZeroLadder);
        }
        Ok(BatchSieveStreaming {
            state: SieveState::new(k, epsilon)?,
            buffer: Vec::with_capacity(config.capacity),
            config,
            sampler,
            seed,
            flushes: 0,
            peak: 0,
            closed: false,
            events: Vec::new(),
        })
    }

    pub fn state(&self) -> &SieveState<T> {
        &self.state
    }

    pub fn buffer(&self) -> &[Element<T>] {
        &self.buffer
    }

    pub fn events(&self) -> &[FlushEvent] {
        &self.events
    }

    pub fn flush_count(&self) -> u64 {
        self.flushes
    }

    /// Logical adaptive rounds over all flushes so far.
    pub fn adaptive_rounds(&self) -> u64 {
        self.events.iter().map(|e| e.rounds).sum()
    }

    pub fn ingest(&mut self, oracle: &InstrumentedOracle<T>, e: Element<T>) -> Result<(), StreamError> {
        if self.closed {
            return Err(StreamError::Closed(e.id));
        }
        self.buffer.push(e);
        self.peak = self.peak.max(self.stored());
        if self.buffer.len() >= self.config.trigger_len() {
            self.flush(oracle)?;
        }
        Ok(())
    }

    /// Processes and clears the buffer; a no-op when it is empty.
    pub fn flush(&mut self, oracle: &InstrumentedOracle<T>) -> Result<(), StreamError> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        let refs: Vec<&Element<T>> = self.buffer.iter().collect();
        let buffer = &self.buffer;
        let event = flush_buffer(
            &mut self.state,
            oracle,
            &refs,
            || VecPool::new(buffer.clone()),
            self.sampler,
            self.seed,
            self.flushes,
        )?;
        self.flushes += 1;
        self.peak = self.peak.max(self.stored());
        self.buffer.clear();
        self.events.push(event);
        Ok(())
    }

    pub fn finalize(&self) -> Solution<T> {
        self.state.best()
    }
}

impl<T: Scalar> StreamingAlgorithm<T> for BatchSieveStreaming<T> {
    fn process(&mut self, oracle: &InstrumentedOracle<T>, e: Element<T>) -> Result<(), StreamError> {
        self.ingest(oracle, e)
    }

    fn finish(&mut self, oracle: &InstrumentedOracle<T>) -> Result<Solution<T>, StreamError> {
        if !self.closed {
            self.flush(oracle)?;
            self.closed = true;
        }
        Ok(self.finalize())
    }

    fn stored(&self) -> usize {
        self.buffer.len() + self.state.stored()
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
    use crate::sieve::SieveStreaming;
    use crate::stream::run_stream;

    fn oracle(k: usize) -> InstrumentedOracle<f64> {
        let f: Arc<dyn Objective<f64>> = Arc::new(Modular);
        InstrumentedOracle::new(f, k)
    }

    fn stream(ws: &[f64]) -> Vec<Element<f64>> {
        ws.iter()
            .enumerate()
            .map(|(i, &w)| Element::weighted(i as u64, w))
            .collect()
    }

    #[test]
    fn trigger_length() {
        assert_eq!(BufferConfig::new(100, 0.8).unwrap().trigger_len(), 80);
        assert_eq!(BufferConfig::new(3, 0.1).unwrap().trigger_len(), 1);
        assert!(BufferConfig::new(0, 0.5).is_err());
        assert!(BufferConfig::new(10, 0.0).is_err());
        assert!(BufferConfig::new(10, 1.5).is_err());
    }

    #[test]
    fn flush_fires_at_trigger_and_not_before() {
        let o = oracle(5);
        let mut h =
            BatchSieveStreaming::new(5, 0.2, BufferConfig::default(), InnerSampler::threshold(), 1)
                .unwrap();
        for (n, e) in stream(&[1.0; 80]).into_iter().enumerate() {
            let before = o.counters();
            h.ingest(&o, e).unwrap();
            if n < 79 {
                assert_eq!(o.counters(), before);
                assert_eq!(h.flush_count(), 0);
            }
        }
        assert_eq!(h.flush_count(), 1);
        assert!(h.buffer().is_empty());
    }

    #[test]
    fn short_stream_gets_a_final_flush() {
        let o = oracle(3);
        let mut h =
            BatchSieveStreaming::new(3, 0.2, BufferConfig::default(), InnerSampler::threshold(), 1)
                .unwrap();
        let sol = run_stream(&mut h, &o, stream(&[1.0, 4.0, 2.0, 3.0])).unwrap();
        assert_eq!(h.flush_count(), 1);
        assert_eq!(sol.value, 9.0);
        assert!(matches!(
            h.ingest(&o, Element::weighted(99, 1.0)),
            Err(StreamError::Closed(99))
        ));
    }

    #[test]
    fn zero_buffer_creates_no_buckets() {
        let o = oracle(3);
        let mut h = BatchSieveStreaming::new(
            3,
            0.2,
            BufferConfig::new(4, 1.0).unwrap(),
            InnerSampler::threshold(),
            1,
        )
        .unwrap();
        for e in stream(&[0.0; 4]) {
            h.ingest(&o, e).unwrap();
        }
        assert_eq!(h.flush_count(), 1);
        assert!(h.state().buckets.is_empty());
        assert!(h.buffer().is_empty());
        assert_eq!(o.counters().rounds, 1);
    }

    #[test]
    fn single_flush_k1_within_guarantee_like_sievepp() {
        for seed in 0..5u64 {
            let ws: Vec<f64> = (0..30).map(|i| ((i * 7 + seed * 3) % 23) as f64 + 0.5).collect();
            let o1 = oracle(1);
            let mut h = BatchSieveStreaming::new(
                1,
                0.3,
                BufferConfig::new(30, 1.0).unwrap(),
                InnerSampler::threshold(),
                seed,
            )
            .unwrap();
            let a = run_stream(&mut h, &o1, stream(&ws)).unwrap();
            let o2 = oracle(1);
            let mut s = SieveStreaming::plus_plus(1, 0.3).unwrap();
            let b = run_stream(&mut s, &o2, stream(&ws)).unwrap();
            let opt = ws.iter().cloned().fold(0.0, f64::max);
            assert!(a.value >= (0.5 - 0.3) * opt, "{} vs {opt}", a.value);
            assert!(b.value >= (0.5 - 0.3) * opt);
        }
    }

    #[test]
    fn alg2_grid_edges() {
        // Δ = 10, LB = 0, k = 1, ε = 0.5: τ_min = 10/3, grid 1.5^i ∈ [3.33, 10]
        let o = oracle(1);
        let mut h = BatchSieveStreaming::new(
            1,
            0.5,
            BufferConfig::new(1, 1.0).unwrap(),
            InnerSampler::threshold(),
            0,
        )
        .unwrap();
        h.ingest(&o, Element::weighted(0, 10.0)).unwrap();
        assert_eq!(h.events()[0].exponents, vec![3, 4, 5]);
        assert!((h.state().tau_min - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unchanged_delta_and_lb_keep_the_grid() {
        // k = 1: after the first flush LB = Δ = 4, so a weaker buffer moves neither
        let o = oracle(1);
        let mut h = BatchSieveStreaming::new(
            1,
            0.5,
            BufferConfig::new(1, 1.0).unwrap(),
            InnerSampler::threshold(),
            0,
        )
        .unwrap();
        h.ingest(&o, Element::weighted(0, 4.0)).unwrap();
        let grid_before: Vec<i32> = h.state().buckets.keys().copied().collect();
        h.ingest(&o, Element::weighted(1, 1.0)).unwrap();
        let grid_after: Vec<i32> = h.state().buckets.keys().copied().collect();
        assert_eq!(grid_before, vec![1, 2, 3]);
        assert_eq!(grid_before, grid_after);
        assert_eq!(h.events()[0].exponents, h.events()[1].exponents);
        assert_eq!(h.events()[1].insertions, 0);
    }

    #[test]
    fn sample_one_nothing_above_any_threshold() {
        let o = oracle(3);
        let mut pool = VecPool::new(stream(&[0.1, 0.2]));
        let params = SamplingParams::new(1.0, 3, 0.2).unwrap();
        let out = sample_one(&o, &[], 0.0, &mut pool, &params, &mut rng_for(0, &[])).unwrap();
        assert!(out.picked.is_empty());
    }

    #[test]
    fn sample_one_k1_is_one_filter_one_pick() {
        let o = oracle(1);
        let mut pool = VecPool::new(stream(&[3.0, 0.5, 2.0]));
        let params = SamplingParams::new(1.0, 1, 0.2).unwrap();
        let out = sample_one(&o, &[], 0.0, &mut pool, &params, &mut rng_for(0, &[])).unwrap();
        assert_eq!(out.picked.len(), 1);
        assert!(out.value >= 1.0);
        assert_eq!(o.counters().rounds, 1);
        assert_eq!(o.counters().queries, 3);
    }

    #[test]
    fn lb_tracks_bucket_values() {
        let o = oracle(4);
        let ws: Vec<f64> = (0..60).map(|i| ((i * 13) % 17) as f64).collect();
        let mut h = BatchSieveStreaming::new(
            4,
            0.2,
            BufferConfig::new(10, 0.8).unwrap(),
            InnerSampler::threshold(),
            3,
        )
        .unwrap();
        let mut last_lb = 0.0;
        for e in stream(&ws) {
            h.ingest(&o, e).unwrap();
            let st = h.state();
            assert!(st.lb >= last_lb);
            last_lb = st.lb;
            for b in st.buckets.values() {
                assert!(b.value <= st.lb + 1e-9);
                assert!(b.len() <= 4);
            }
        }
    }

    #[test]
    fn flush_rounds_count_the_longest_threshold() {
        let o = oracle(4);
        let mut h =
            BatchSieveStreaming::new(4, 0.3, BufferConfig::default(), InnerSampler::SampleOne, 2)
                .unwrap();
        let weights: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        run_stream(&mut h, &o, stream(&weights)).unwrap();
        let e = &h.events()[0];
        assert!(e.exponents.len() > 1);
        assert!(e.rounds < e.sequential_rounds);
        assert_eq!(e.sequential_rounds, o.counters().rounds);
        assert_eq!(h.adaptive_rounds(), e.rounds);
    }
}
