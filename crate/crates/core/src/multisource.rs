//! Simulated multi-source setting.
//!
//! `m` stream machines each buffer their own stream. When any buffer reaches
//! its trigger fill, the coordinator runs one buffered-sieve flush over the
//! union of all buffers:
//!
//! * machines filter their own buffers against the shared `S_τ` in a single
//!   common round, which costs no communication;
//! * a uniform sample of `t` elements from the union is obtained by fixing
//!   how many each machine sends (a multivariate-hypergeometric split over
//!   survivor counts) and fetching those quotas; every fetched element counts
//!   one unit of communication, whether it is later kept or not;
//! * thresholds and the sets `S_τ` live in shared memory and are free;
//! * after the flush every buffer is cleared.
//!
//! Time is logical and the run is single-threaded, so a seed fixes the whole
//! schedule.

use rand::Rng;
use thiserror::Error;

use crate::element::{Element, PayloadKind};
use crate::hybrid::{flush_buffer, BufferConfig, FlushEvent, InnerSampler};
use crate::metrics::RunMetrics;
use crate::oracle::{InstrumentedOracle, OracleError};
use crate::params::{check_k, ParamError};
use crate::rng::{purpose, rng_for};
use crate::sampling::pool::{retain_by_mask, take_preserving_order};
use crate::sampling::CandidatePool;
use crate::scalar::Scalar;
use crate::sieve::SieveState;
use crate::solution::Solution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiSourceError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("source {source_id} carries {found} payloads but earlier sources carry {expected}")]
    MixedSources {
        source_id: usize,
        expected: PayloadKind,
        found: PayloadKind,
    },
}

/// Order in which stream machines receive their next element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interleave {
    /// One element per source per tick, sources in index order.
    #[default]
    RoundRobin,
    /// Each step a uniformly random source with elements left.
    Seeded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiSourceConfig<T> {
    pub k: usize,
    pub epsilon: T,
    pub buffer: BufferConfig,
    /// Threshold sampling (with its prefix ladder) or the Sample-One baseline.
    pub sampler: InnerSampler,
    pub seed: u64,
    pub interleave: Interleave,
}

impl<T: Scalar> MultiSourceConfig<T> {
    pub fn new(k: usize, epsilon: T, seed: u64) -> Self {
        MultiSourceConfig {
            k,
            epsilon,
            buffer: BufferConfig::default(),
            sampler: InnerSampler::threshold(),
            seed,
            interleave: Interleave::RoundRobin,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StreamMachine<T> {
    pub stream_id: u32,
    pub buffer: Vec<Element<T>>,
}

/// Union of the machines' buffers seen as one candidate pool.
///
/// Candidate order is machine order, then arrival order within a machine.
/// Fetched elements never return to their machine.
#[derive(Clone, Debug)]
pub struct DistributedPool<T> {
    parts: Vec<Vec<Element<T>>>,
    fetched: Vec<usize>,
}

impl<T: Scalar> DistributedPool<T> {
    pub fn new(parts: Vec<Vec<Element<T>>>) -> Self {
        let m = parts.len();
        DistributedPool {
            parts,
            fetched: vec![0; m],
        }
    }

    /// Elements sent by each machine so far.
    pub fn fetched(&self) -> &[usize] {
        &self.fetched
    }
}

impl<T: Scalar> CandidatePool<T> for DistributedPool<T> {
    fn len(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    fn candidates(&self) -> Vec<&Element<T>> {
        self.parts.iter().flatten().collect()
    }

    fn retain_mask(&mut self, keep: &[bool]) {
        let mut offset = 0;
        for part in &mut self.parts {
            let n = part.len();
            retain_by_mask(part, &keep[offset..offset + n]);
            offset += n;
        }
    }

    fn take(&mut self, indices: &[usize]) -> Vec<Element<T>> {
        // global index -> (machine, local index); per-machine counts are the quotas
        let mut starts = Vec::with_capacity(self.parts.len());
        let mut acc = 0;
        for part in &self.parts {
            starts.push(acc);
            acc += part.len();
        }
        let locate = |g: usize| {
            let m = starts.partition_point(|&s| s <= g) - 1;
            (m, g - starts[m])
        };
        let mut per_machine: Vec<Vec<usize>> = vec![Vec::new(); self.parts.len()];
        let placed: Vec<(usize, usize)> = indices
            .iter()
            .map(|&g| {
                let (m, local) = locate(g);
                let slot = per_machine[m].len();
                per_machine[m].push(local);
                (m, slot)
            })
            .collect();
        let mut sent: Vec<Vec<Element<T>>> = Vec::with_capacity(self.parts.len());
        for (m, locals) in per_machine.iter().enumerate() {
            self.fetched[m] += locals.len();
            sent.push(take_preserving_order(&mut self.parts[m], locals));
        }
        placed
            .into_iter()
            .map(|(m, slot)| sent[m][slot].clone())
            .collect()
    }

    fn reject_unexamined(&mut self, elements: Vec<Element<T>>) {
        drop(elements);
    }
}

#[derive(Clone, Debug)]
pub struct MultiSourceOutcome<T> {
    pub solution: Solution<T>,
    pub metrics: RunMetrics,
    /// Elements ever inserted into any `S_τ`.
    pub bucket_insertions: u64,
    /// Largest singleton value at the first trigger.
    pub delta0: Option<T>,
    pub flushes: Vec<FlushEvent>,
}

fn check_sources<T: Scalar>(sources: &[Vec<Element<T>>]) -> Result<(), MultiSourceError> {
    let mut expected: Option<PayloadKind> = None;
    for (source_id, src) in sources.iter().enumerate() {
        for e in src {
            match expected {
                None => expected = Some(e.kind()),
                Some(kind) if kind != e.kind() => {
                    return Err(MultiSourceError::MixedSources {
                        source_id,
                        expected: kind,
                        found: e.kind(),
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Runs the coordinator over `sources` (one element list per machine).
pub fn multisource_run<T: Scalar>(
    oracle: &InstrumentedOracle<T>,
    sources: Vec<Vec<Element<T>>>,
    config: &MultiSourceConfig<T>,
) -> Result<MultiSourceOutcome<T>, MultiSourceError> {
    if sources.is_empty() {
        return Err(ParamError::NoSources.into());
    }
    check_k(config.k)?;
    config.buffer.validate()?;
    if config.sampler == (InnerSampler::Threshold { ladder: 0 }) {
        return Err(ParamError::ZeroLadder.into());
    }
    check_sources(&sources)?;

    let start = std::time::Instant::now();
    let before = oracle.counters();
    let mut coordinator = Coordinator {
        machines: (0..sources.len())
            .map(|i| StreamMachine {
                stream_id: i as u32,
                buffer: Vec::with_capacity(config.buffer.capacity),
            })
            .collect(),
        state: SieveState::new(config.k, config.epsilon)?,
        config: *config,
        delta0: None,
        flushes: Vec::new(),
        peak: 0,
    };

    let mut cursors = vec![0usize; sources.len()];
    let mut remaining: usize = sources.iter().map(Vec::len).sum();
    let mut interleave_rng = rng_for(config.seed, &[purpose::INTERLEAVE]);
    while remaining > 0 {
        match config.interleave {
            Interleave::RoundRobin => {
                for (m, src) in sources.iter().enumerate() {
                    if cursors[m] < src.len() {
                        let e = src[cursors[m]].clone();
                        cursors[m] += 1;
                        remaining -= 1;
                        coordinator.deliver(oracle, m, e)?;
                    }
                }
            }
            Interleave::Seeded => {
                let live: Vec<usize> =
                    (0..sources.len()).filter(|&m| cursors[m] < sources[m].len()).collect();
                let m = live[interleave_rng.random_range(0..live.len())];
                let e = sources[m][cursors[m]].clone();
                cursors[m] += 1;
                remaining -= 1;
                coordinator.deliver(oracle, m, e)?;
            }
        }
    }
    if coordinator.machines.iter().any(|mach| !mach.buffer.is_empty()) {
        coordinator.flush(oracle, None)?;
    }

    let used = oracle.counters() - before;
    let solution = coordinator.state.best();
    let flushes = coordinator.flushes;
    let metrics = RunMetrics {
        utility: solution.value.as_f64(),
        peak_memory: coordinator.peak as u64,
        queries: used.queries,
        adaptive_rounds: flushes.iter().map(|f| f.rounds).sum(),
        communication: flushes.iter().map(|f| f.sampled as u64).sum(),
        wasted_communication: flushes.iter().map(|f| f.wasted as u64).sum(),
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok(MultiSourceOutcome {
        solution,
        metrics,
        bucket_insertions: flushes.iter().map(|f| f.insertions as u64).sum(),
        delta0: coordinator.delta0,
        flushes,
    })
}

struct Coordinator<T> {
    machines: Vec<StreamMachine<T>>,
    state: SieveState<T>,
    config: MultiSourceConfig<T>,
    delta0: Option<T>,
    flushes: Vec<FlushEvent>,
    peak: usize,
}

impl<T: Scalar> Coordinator<T> {
    fn stored(&self) -> usize {
        self.machines.iter().map(|m| m.buffer.len()).sum::<usize>() + self.state.stored()
    }

    fn deliver(
        &mut self,
        oracle: &InstrumentedOracle<T>,
        machine: usize,
        e: Element<T>,
    ) -> Result<(), MultiSourceError> {
        self.machines[machine].buffer.push(e);
        self.peak = self.peak.max(self.stored());
        if self.machines[machine].buffer.len() >= self.config.buffer.trigger_len() {
            self.flush(oracle, Some(self.machines[machine].stream_id))?;
        }
        Ok(())
    }

    fn flush(
        &mut self,
        oracle: &InstrumentedOracle<T>,
        trigger: Option<u32>,
    ) -> Result<(), MultiSourceError> {
        let parts: Vec<Vec<Element<T>>> =
            self.machines.iter().map(|m| m.buffer.clone()).collect();
        let refs: Vec<&Element<T>> = parts.iter().flatten().collect();
        let mut event = flush_buffer(
            &mut self.state,
            oracle,
            &refs,
            || DistributedPool::new(parts.clone()),
            self.config.sampler,
            self.config.seed,
            self.flushes.len() as u64,
        )?;
        event.trigger_source = trigger;
        if self.delta0.is_none() {
            self.delta0 = Some(self.state.delta);
        }
        self.peak = self.peak.max(self.stored());
        for m in &mut self.machines {
            m.buffer.clear();
        }
        self.flushes.push(event);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hybrid::BatchSieveStreaming;
    use crate::oracle::{Modular, Objective};
    use crate::stream::run_stream;

    fn oracle(k: usize) -> InstrumentedOracle<f64> {
        let f: Arc<dyn Objective<f64>> = Arc::new(Modular);
        InstrumentedOracle::new(f, k)
    }

    fn weights(offset: u64, ws: &[f64]) -> Vec<Element<f64>> {
        ws.iter()
            .enumerate()
            .map(|(i, &w)| Element::weighted(offset + i as u64, w))
            .collect()
    }

    #[test]
    fn distributed_take_maps_global_indices() {
        let mut pool = DistributedPool::new(vec![
            weights(0, &[1.0, 2.0]),
            weights(10, &[3.0]),
            weights(20, &[4.0, 5.0]),
        ]);
        let got = pool.take(&[3, 0, 2]);
        assert_eq!(got.iter().map(|e| e.id).collect::<Vec<_>>(), vec![20, 0, 10]);
        assert_eq!(pool.fetched(), &[1, 1, 1]);
        assert_eq!(
            pool.candidates().iter().map(|e| e.id).collect::<Vec<_>>(),
            vec![1, 21]
        );
        pool.retain_mask(&[false, true]);
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn single_source_matches_single_machine() {
        let ws: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        for seed in 0..4 {
            let cfg = MultiSourceConfig {
                buffer: BufferConfig::new(50, 0.8).unwrap(),
                ..MultiSourceConfig::new(10, 0.3, seed)
            };
            let o1 = oracle(10);
            let multi = multisource_run(&o1, vec![weights(0, &ws)], &cfg).unwrap();
            let o2 = oracle(10);
            let mut single =
                BatchSieveStreaming::new(10, 0.3, cfg.buffer, InnerSampler::threshold(), seed)
                    .unwrap();
            let sol = run_stream(&mut single, &o2, weights(0, &ws)).unwrap();
            assert_eq!(multi.solution.value, sol.value);
            assert_eq!(multi.solution.ids(), sol.ids());
            let sampled: usize = single.events().iter().map(|e| e.sampled).sum();
            assert_eq!(multi.metrics.communication, sampled as u64);
        }
    }

    #[test]
    fn zero_streams_cost_nothing() {
        let o = oracle(3);
        let sources = vec![weights(0, &[0.0; 20]), weights(100, &[0.0; 20])];
        let out = multisource_run(&o, sources, &MultiSourceConfig::new(3, 0.5, 1)).unwrap();
        assert_eq!(out.metrics.communication, 0);
        assert_eq!(out.metrics.utility, 0.0);
    }

    #[test]
    fn errors() {
        let o = oracle(3);
        let cfg = MultiSourceConfig::new(3, 0.5, 1);
        assert!(matches!(
            multisource_run(&o, vec![], &cfg),
            Err(MultiSourceError::Param(ParamError::NoSources))
        ));
        let mixed = vec![weights(0, &[1.0]), vec![Element::coverage(5, vec![1])]];
        assert!(matches!(
            multisource_run(&o, mixed, &cfg),
            Err(MultiSourceError::MixedSources { source_id: 1, .. })
        ));
    }

    #[test]
    fn seeded_interleaving_is_reproducible() {
        let sources: Vec<Vec<Element<f64>>> = (0..4)
            .map(|m| {
                let ws: Vec<f64> = (0..60).map(|i| ((i * 7 + m * 13) % 19) as f64).collect();
                weights(1000 * m as u64, &ws)
            })
            .collect();
        let cfg = MultiSourceConfig {
            interleave: Interleave::Seeded,
            buffer: BufferConfig::new(20, 0.8).unwrap(),
            ..MultiSourceConfig::new(5, 0.4, 11)
        };
        let a = multisource_run(&oracle(5), sources.clone(), &cfg).unwrap();
        let b = multisource_run(&oracle(5), sources, &cfg).unwrap();
        assert_eq!(a.metrics.deterministic_part(), b.metrics.deterministic_part());
        assert_eq!(a.solution.ids(), b.solution.ids());
        assert!(a.flushes.iter().all(|f| f.buffered > 0));
    }
}
