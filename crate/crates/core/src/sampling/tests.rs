use std::sync::Arc;

use super::*;
use crate::oracle::{Modular, Objective, WeightedCoverage};
use crate::rng::rng_for;

fn modular_oracle(k: usize) -> InstrumentedOracle<f64> {
    let f: Arc<dyn Objective<f64>> = Arc::new(Modular);
    InstrumentedOracle::new(f, k)
}

fn weights(ws: &[f64]) -> Vec<Element<f64>> {
    ws.iter()
        .enumerate()
        .map(|(i, &w)| Element::weighted(i as u64, w))
        .collect()
}

#[test]
fn nothing_clears_threshold() {
    let o = modular_oracle(5);
    let mut pool = VecPool::new(weights(&[0.1, 0.5, 0.9, 0.2]));
    let params = SamplingParams::new(1.0, 5, 0.2).unwrap();
    let out = threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(1, &[])).unwrap();
    assert!(out.picked.is_empty());
    assert!(pool.is_empty());
    assert_eq!(o.counters().rounds, 1);
    assert_eq!(out.iterations, 1);
}

#[test]
fn gains_exactly_tau_fill_the_budget() {
    let tau = 2.5;
    for &eps in &[0.05, 0.1, 0.3, 0.5, 0.9] {
        for seed in 0..10 {
            let o = modular_oracle(3);
            let mut pool = VecPool::new(weights(&[tau; 10]));
            let params = SamplingParams::new(tau, 3, eps).unwrap();
            let out =
                threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(seed, &[])).unwrap();
            assert_eq!(out.picked.len(), 3);
            assert_eq!(out.value, 3.0 * tau);
        }
    }
}

#[test]
fn lone_survivor_is_picked_in_two_rounds() {
    let o = modular_oracle(4);
    let mut pool = VecPool::new(weights(&[3.0]));
    let params = SamplingParams::new(1.0, 4, 0.25).unwrap();
    let out = threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(9, &[])).unwrap();
    assert_eq!(out.picked.len(), 1);
    assert!(o.counters().rounds <= 2);
}

#[test]
fn first_single_reuses_the_filter_gain() {
    // filter, then the second single sample; the first costs nothing
    let o = modular_oracle(2);
    let mut pool = VecPool::new(weights(&[3.0, 2.0, 0.5]));
    let params = SamplingParams::new(1.0, 2, 0.25).unwrap();
    let out = threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(4, &[])).unwrap();
    assert_eq!(out.value, 5.0);
    assert_eq!(o.counters().rounds, 2);
    assert_eq!(o.counters().queries, 3 + 1);
}

#[test]
fn base_set_is_respected() {
    // coverage: base already covers item 0, so {0} gains nothing
    let f: Arc<dyn Objective<f64>> = Arc::new(WeightedCoverage::unit(4));
    let o = InstrumentedOracle::new(f, 3);
    let base = vec![Element::coverage(100, vec![0])];
    let mut pool = VecPool::new(vec![
        Element::coverage(1, vec![0]),
        Element::coverage(2, vec![1]),
    ]);
    let params = SamplingParams::new(1.0, 2, 0.5).unwrap();
    let out = threshold_sampling(&o, &base, 1.0, &mut pool, &params, &mut rng_for(0, &[])).unwrap();
    assert_eq!(out.picked.iter().map(|e| e.id).collect::<Vec<_>>(), vec![2]);
    assert_eq!(out.value, 2.0);
}

#[test]
fn same_seed_same_trace() {
    let ws: Vec<f64> = (0..200).map(|i| ((i * 7919) % 97) as f64 / 10.0).collect();
    let run_once = |seed| {
        let o = modular_oracle(40);
        let mut pool = VecPool::new(weights(&ws));
        let params = SamplingParams::new(4.0, 40, 0.2).unwrap();
        threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(seed, &[])).unwrap()
    };
    let a = run_once(5);
    let b = run_once(5);
    assert_eq!(a.trace, b.trace);
    assert_eq!(
        a.picked.iter().map(|e| e.id).collect::<Vec<_>>(),
        b.picked.iter().map(|e| e.id).collect::<Vec<_>>()
    );
    let lines: Vec<String> = a.trace.iter().map(|r| r.to_string()).collect();
    assert!(lines[0].starts_with("iter=1 step=filter"));
}

/// Pool wrapper that checks survivors right after every filter.
struct Audited<'o> {
    inner: VecPool<f64>,
    oracle: &'o InstrumentedOracle<f64>,
    tau: f64,
    violations: usize,
}

impl CandidatePool<f64> for Audited<'_> {
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn candidates(&self) -> Vec<&Element<f64>> {
        self.inner.candidates()
    }
    fn retain_mask(&mut self, keep: &[bool]) {
        self.inner.retain_mask(keep);
        for e in self.inner.items() {
            // modular: gain is the weight regardless of the picks
            let v = crate::oracle::evaluate(self.oracle.objective().as_ref(), &[e]).unwrap();
            if v < self.tau {
                self.violations += 1;
            }
        }
    }
    fn take(&mut self, indices: &[usize]) -> Vec<Element<f64>> {
        self.inner.take(indices)
    }
    fn reject_unexamined(&mut self, elements: Vec<Element<f64>>) {
        self.inner.reject_unexamined(elements)
    }
}

#[test]
fn survivors_clear_threshold_after_filter() {
    let o = modular_oracle(30);
    let ws: Vec<f64> = (0..300).map(|i| ((i * 31) % 50) as f64 / 10.0).collect();
    let mut pool = Audited {
        inner: VecPool::new(weights(&ws)),
        oracle: &o,
        tau: 2.0,
        violations: 0,
    };
    let params = SamplingParams::new(2.0, 30, 0.1).unwrap();
    threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(3, &[])).unwrap();
    assert_eq!(pool.violations, 0);
}

#[test]
fn rounds_per_iteration_bounded() {
    for seed in 0..20 {
        let eps = 0.2;
        let k = 25;
        let f: Arc<dyn Objective<f64>> = Arc::new(WeightedCoverage::unit(60));
        let o = InstrumentedOracle::new(f, k);
        let ground: Vec<Element<f64>> = (0..150u64)
            .map(|i| {
                let a = ((i * 13 + seed) % 60) as u32;
                let b = ((i * 29 + 7 * seed) % 60) as u32;
                Element::coverage(i, vec![a, b])
            })
            .collect();
        let mut pool = VecPool::new(ground);
        let params = SamplingParams::new(1.0, k, eps).unwrap();
        let out =
            threshold_sampling(&o, &[], 0.0, &mut pool, &params, &mut rng_for(seed, &[])).unwrap();
        let per_iter = 1 + params.single_steps() as u64 + params.grid.ceil_log(k as f64) as u64;
        assert!(o.counters().rounds <= out.iterations as u64 * per_iter);
        if out.picked.len() < k {
            assert!(pool.is_empty());
        }
    }
}

#[test]
fn batch_schedule_sizes() {
    let p = SamplingParams::new(1.0, 50, 0.5).unwrap();
    // ⌊log_1.5 2⌋ = 1, ⌈log_1.5 50⌉ − 1 = 9
    assert_eq!(p.batch_exponents(), (1, 9));
    assert_eq!(p.single_steps(), 2);
    assert_eq!(p.prefix_sizes(1, 1), vec![0]);
    assert_eq!(p.prefix_sizes(2, 1), vec![1]);
    assert_eq!(p.prefix_sizes(6, 1), vec![5]);
    let r3 = p.with_ladder(3).unwrap();
    // ⌈1.5^{2+j} − 1.5^2⌉ for j = 1, 2, 3
    assert_eq!(r3.prefix_sizes(2, 3), vec![2, 3, 6]);
}

#[test]
fn ladder_of_one_matches_plain_sampler() {
    let ws: Vec<f64> = (0..120).map(|i| ((i * 17) % 40) as f64 / 8.0).collect();
    for seed in 0..5 {
        let o1 = modular_oracle(20);
        let o2 = modular_oracle(20);
        let params = SamplingParams::new(2.0, 20, 0.3).unwrap();
        let mut p1 = VecPool::new(weights(&ws));
        let mut p2 = VecPool::new(weights(&ws));
        let a = threshold_sampling(&o1, &[], 0.0, &mut p1, &params, &mut rng_for(seed, &[])).unwrap();
        let b = threshold_sampling_batched(&o2, &[], 0.0, &mut p2, &params, 1, &mut rng_for(seed, &[]))
            .unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(b.wasted, 0);
        assert_eq!(o1.counters(), o2.counters());
    }
}

#[test]
fn ladder_wastes_nothing_when_every_prefix_passes() {
    let tau = 1.0;
    for r in [2, 4, 8] {
        let o = modular_oracle(30);
        let mut pool = VecPool::new(weights(&[tau; 200]));
        let params = SamplingParams::new(tau, 30, 0.3).unwrap();
        let out = threshold_sampling_batched(&o, &[], 0.0, &mut pool, &params, r, &mut rng_for(2, &[]))
            .unwrap();
        assert_eq!(out.picked.len(), 30);
        assert_eq!(out.wasted, 0);
    }
}

#[test]
fn ladder_with_nothing_above_threshold() {
    let o = modular_oracle(10);
    let mut pool = VecPool::new(weights(&[0.1; 20]));
    let params = SamplingParams::new(1.0, 10, 0.3).unwrap();
    let out =
        threshold_sampling_batched(&o, &[], 0.0, &mut pool, &params, 4, &mut rng_for(2, &[])).unwrap();
    assert!(out.picked.is_empty());
    assert_eq!(out.wasted, 0);
}

#[test]
fn longer_ladders_use_fewer_rounds() {
    let ws: Vec<f64> = (0..400).map(|i| 1.0 + (i % 5) as f64).collect();
    let mut rounds = Vec::new();
    for r in [1, 2, 4, 8] {
        let o = modular_oracle(60);
        let mut pool = VecPool::new(weights(&ws));
        let params = SamplingParams::new(1.0, 60, 0.2).unwrap();
        threshold_sampling_batched(&o, &[], 0.0, &mut pool, &params, r, &mut rng_for(4, &[])).unwrap();
        rounds.push(o.counters().rounds);
    }
    assert!(rounds.windows(2).all(|w| w[1] <= w[0]), "{rounds:?}");
    assert!(rounds[3] < rounds[0]);
}

#[test]
fn invalid_params() {
    assert!(SamplingParams::new(0.0, 3, 0.1).is_err());
    assert!(SamplingParams::new(1.0, 0, 0.1).is_err());
    assert!(SamplingParams::new(1.0, 3, 1.0).is_err());
    assert!(SamplingParams::new(1.0, 3, 0.1).unwrap().with_ladder(0).is_err());
}
