//! Randomized threshold sampling over a buffer.
//!
//! Given a base set `S_τ` (already picked for threshold `τ`), a pool of
//! buffered candidates and a budget of `k` further picks, the sampler
//! alternates:
//!
//! 1. **filter**: one round that drops every candidate whose marginal gain to
//!    the current picks is below `τ`;
//! 2. **single samples**: up to `⌈1/ε⌉` uniform draws, one round each, kept
//!    while their gain exceeds `(1−ε)τ`; the first draw reuses its gain from
//!    the filter, which always passes, so it costs no round;
//! 3. **batches**: for `i` from `⌊log_{1+ε}(1/ε)⌋` to `⌈log_{1+ε} k⌉ − 1`, a
//!    uniform batch of `⌊(1+ε)^{i+1} − (1+ε)^i⌋` candidates is always added;
//!    the step stops (back to 1) when its average gain is at most `(1−ε)τ`.
//!
//! until the pool is empty or the budget is spent. Every sampled batch is
//! kept, which is what bounds communication in the multi-source setting.
//!
//! With a ladder length `R > 1` one round evaluates the `R` nested prefixes
//! of a single sample of size `⌈(1+ε)^{i+R} − (1+ε)^i⌉`, standing in for `R`
//! consecutive batch steps. The largest prefix whose predecessors all passed
//! the average test is kept; the rest of the sample is wasted.

pub(crate) mod pool;
mod trace;

use std::collections::HashMap;

use rand::seq::index;
use rand::Rng;

pub use pool::{CandidatePool, VecPool};
pub use trace::{Decision, StepKind, TraceRecord};

use crate::element::Element;
use crate::grid::ThresholdGrid;
use crate::oracle::{InstrumentedOracle, OracleError};
use crate::params::{check_k, ParamError};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingParams<T> {
    pub tau: T,
    pub k_remaining: usize,
    pub ladder: usize,
    grid: ThresholdGrid<T>,
}

impl<T: Scalar> SamplingParams<T> {
    pub fn new(tau: T, k_remaining: usize, epsilon: T) -> Result<Self, ParamError> {
        check_k(k_remaining)?;
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(ParamError::Threshold(tau.as_f64()));
        }
        Ok(SamplingParams {
            tau,
            k_remaining,
            ladder: 1,
            grid: ThresholdGrid::new(epsilon)?,
        })
    }

    /// Collapses `r` batch steps into one round.
    pub fn with_ladder(mut self, r: usize) -> Result<Self, ParamError> {
        if r == 0 {
            return Err(ParamError::ZeroLadder);
        }
        self.ladder = r;
        Ok(self)
    }

    pub fn epsilon(&self) -> T {
        self.grid.epsilon()
    }

    /// Number of single-sample draws per while-iteration, `⌈1/ε⌉`.
    pub fn single_steps(&self) -> usize {
        (T::one() / self.epsilon()).ceil().to_usize().unwrap_or(usize::MAX)
    }

    /// Inclusive exponent range of the batch loop.
    pub fn batch_exponents(&self) -> (i32, i32) {
        let first = self.grid.floor_log(T::one() / self.epsilon());
        let last = self.grid.ceil_log(T::of_usize(self.k_remaining)) - 1;
        (first, last)
    }

    /// Prefix sizes evaluated at batch step `i`, given `steps ≤ R` steps left
    /// in the exponent range. With `R = 1` this is the single batch size
    /// `⌊(1+ε)^{i+1} − (1+ε)^i⌋`; longer ladders use
    /// `⌈(1+ε)^{i+j} − (1+ε)^i⌉` for `j = 1..=steps`.
    pub fn prefix_sizes(&self, i: i32, steps: usize) -> Vec<usize> {
        let start = self.grid.tau(i);
        if self.ladder == 1 {
            let t = (self.grid.tau(i + 1) - start).floor();
            return vec![t.to_usize().unwrap_or(0)];
        }
        (1..=steps as i32)
            .map(|j| {
                (self.grid.tau(i + j) - start)
                    .ceil()
                    .to_usize()
                    .unwrap_or(usize::MAX)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct SamplingOutcome<T> {
    /// Picked elements in insertion order.
    pub picked: Vec<Element<T>>,
    /// `f(base ∪ picked)`.
    pub value: T,
    /// Iterations of the outer filter loop.
    pub iterations: usize,
    /// Elements drawn from the pool.
    pub sampled: usize,
    /// Drawn elements beyond the kept ladder prefix.
    pub wasted: usize,
    pub trace: Vec<TraceRecord>,
}

struct Current<'b, T> {
    base: &'b [Element<T>],
    picked: Vec<Element<T>>,
    value: T,
}

impl<'b, T: Scalar> Current<'b, T> {
    fn query<'c>(&'c self, extra: &'c [Element<T>]) -> Vec<&'c Element<T>> {
        self.base
            .iter()
            .chain(self.picked.iter())
            .chain(extra.iter())
            .collect()
    }
}

/// Threshold sampling with the plain one-batch-per-round schedule.
pub fn threshold_sampling<T, P, R>(
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
    let params = SamplingParams { ladder: 1, ..*params };
    run(oracle, base, base_value, pool, &params, rng)
}

/// Threshold sampling where one round evaluates `r` nested batch prefixes.
pub fn threshold_sampling_batched<T, P, R>(
    oracle: &InstrumentedOracle<T>,
    base: &[Element<T>],
    base_value: T,
    pool: &mut P,
    params: &SamplingParams<T>,
    r: usize,
    rng: &mut R,
) -> Result<SamplingOutcome<T>, OracleError>
where
    T: Scalar,
    P: CandidatePool<T> + ?Sized,
    R: Rng + ?Sized,
{
    let params = params.with_ladder(r.max(1)).expect("ladder at least one");
    run(oracle, base, base_value, pool, &params, rng)
}

/// Entry point honouring `params.ladder`.
pub fn run<T, P, R>(
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
    let tau = params.tau;
    let budget = params.k_remaining;
    let pass_level = (T::one() - params.epsilon()) * tau;
    let (first_exp, last_exp) = params.batch_exponents();

    let mut cur = Current {
        base,
        picked: Vec::new(),
        value: base_value,
    };
    let mut out_trace = Vec::new();
    let mut iterations = 0;
    let mut sampled = 0;
    let mut wasted = 0;

    macro_rules! done {
        () => {
            return Ok(SamplingOutcome {
                picked: cur.picked,
                value: cur.value,
                iterations,
                sampled,
                wasted,
                trace: out_trace,
            })
        };
    }

    'outer: while !pool.is_empty() && cur.picked.len() < budget {
        iterations += 1;

        // filter
        let values = {
            let candidates = pool.candidates();
            let queries: Vec<Vec<&Element<T>>> = candidates
                .iter()
                .map(|x| {
                    let mut q = cur.query(&[]);
                    q.push(x);
                    q
                })
                .collect();
            oracle.eval_batch(&queries)?
        };
        let keep: Vec<bool> = values.iter().map(|&v| v - cur.value >= tau).collect();
        let discarded: Vec<(u64, f64)> = pool
            .candidates()
            .iter()
            .zip(&values)
            .zip(&keep)
            .filter(|(_, &k)| !k)
            .map(|((x, &v), _)| (x.id, (v - cur.value).as_f64()))
            .collect();
        // Gains of the survivors against the unchanged picks; they decide the
        // first single sample without another query.
        let fresh: HashMap<u64, T> = pool
            .candidates()
            .iter()
            .zip(&values)
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|((x, &v), _)| (x.id, v))
            .collect();
        pool.retain_mask(&keep);
        out_trace.push(TraceRecord {
            iteration: iterations,
            step: StepKind::Filter,
            size: pool.len(),
            avg_gain: None,
            decision: Decision::Filtered { discarded },
        });
        if pool.is_empty() {
            break;
        }

        // single samples
        for step in 0..params.single_steps() {
            if pool.is_empty() {
                continue 'outer;
            }
            let idx = rng.random_range(0..pool.len());
            let x = pool.take(&[idx]);
            sampled += 1;
            let v = match fresh.get(&x[0].id) {
                Some(&v) if step == 0 => v,
                _ => oracle.eval(&cur.query(&x))?,
            };
            let gain = v - cur.value;
            if gain <= pass_level {
                out_trace.push(TraceRecord {
                    iteration: iterations,
                    step: StepKind::Single,
                    size: 1,
                    avg_gain: Some(gain.as_f64()),
                    decision: Decision::Reject { id: x[0].id },
                });
                pool.reject_examined(x);
                continue 'outer;
            }
            out_trace.push(TraceRecord {
                iteration: iterations,
                step: StepKind::Single,
                size: 1,
                avg_gain: Some(gain.as_f64()),
                decision: Decision::Accept,
            });
            cur.picked.extend(x);
            cur.value = v;
            if cur.picked.len() == budget {
                done!();
            }
        }

        // geometric batches
        let mut i = first_exp;
        while i <= last_exp {
            let steps_left = (last_exp - i + 1) as usize;
            let steps = params.ladder.min(steps_left);
            let mut sizes = params.prefix_sizes(i, steps);
            let advance = sizes.len() as i32;
            if sizes.last().copied().unwrap_or(0) == 0 {
                i += advance;
                continue;
            }
            let cap = pool.len().min(budget - cur.picked.len());
            if cap == 0 {
                continue 'outer;
            }
            for s in sizes.iter_mut() {
                *s = (*s).min(cap);
            }
            sizes.dedup();
            let total = *sizes.last().expect("non-empty ladder");

            let picks = index::sample(rng, pool.len(), total).into_vec();
            let mut batch = pool.take(&picks);
            sampled += total;

            let values = {
                let mut queries: Vec<Vec<&Element<T>>> =
                    sizes.iter().map(|&s| cur.query(&batch[..s])).collect();
                queries.push(cur.query(&[]));
                oracle.eval_batch(&queries)?
            };
            let before = values[sizes.len()];

            // walk the ladder as consecutive batch steps
            let mut kept = sizes.len() - 1;
            let mut decision = Decision::Accept;
            for (j, &s) in sizes.iter().enumerate() {
                let gain = values[j] - before;
                if cur.picked.len() + s == budget {
                    kept = j;
                    decision = Decision::Complete;
                    break;
                }
                if gain / T::of_usize(s) <= pass_level {
                    kept = j;
                    decision = Decision::Break;
                    break;
                }
            }
            let keep_len = sizes[kept];
            let rest = batch.split_off(keep_len);
            wasted += rest.len();
            if !rest.is_empty() {
                pool.reject_unexamined(rest);
            }
            let gain = values[kept] - before;
            out_trace.push(TraceRecord {
                iteration: iterations,
                step: StepKind::Batch,
                size: keep_len,
                avg_gain: Some((gain / T::of_usize(keep_len)).as_f64()),
                decision: decision.clone(),
            });
            cur.picked.extend(batch);
            cur.value = values[kept];
            match decision {
                Decision::Complete => done!(),
                Decision::Break => continue 'outer,
                _ => {}
            }
            i += advance;
        }
    }
    done!()
}

#[cfg(test)]
mod tests;
