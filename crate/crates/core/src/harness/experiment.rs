use std::sync::Arc;
use std::time::Instant;

use super::config::{Algorithm, DataSource, ExperimentConfig, ObjectiveKind};
use super::data::{load_tweets, load_vectors};
use super::generate::generate;
use super::{Dataset, HarnessError};
use crate::element::Element;
use crate::exact::{brute_force_opt, greedy, ExactError};
use crate::hybrid::{BatchSieveStreaming, FlushEvent, InnerSampler};
use crate::metrics::RunMetrics;
use crate::multisource::{multisource_run, MultiSourceConfig, MultiSourceError};
use crate::oracle::{InstrumentedOracle, KeywordCoverage, LogDet, Modular, Objective, OracleError, WeightedCoverage};
use crate::sieve::{PreemptionStreaming, SieveStreaming};
use crate::solution::Solution;
use crate::stream::{run_stream, StreamError, StreamingAlgorithm};

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub metrics: RunMetrics,
    pub solution: Solution<f64>,
    /// Ground-set size.
    pub n: usize,
    /// Per-flush log of buffered algorithms; empty otherwise.
    pub events: Vec<FlushEvent>,
}

/// Loads or generates the config's ground set.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    match &config.data {
        DataSource::Tweets(p) => Ok(Dataset {
            elements: load_tweets(p)?.elements,
            coverage_weights: None,
        }),
        DataSource::Vectors(p) => Ok(Dataset {
            elements: load_vectors(p)?,
            coverage_weights: None,
        }),
        DataSource::Generate(_) => generate(&config.generator_spec().expect("generated source")),
    }
}

fn build_objective(
    kind: ObjectiveKind,
    alpha: f64,
    data: &Dataset,
) -> Result<Arc<dyn Objective<f64>>, HarnessError> {
    let expected = kind.payload_kind();
    if let Some(e) = data.elements.iter().find(|e| e.kind() != expected) {
        return Err(HarnessError::Config(format!(
            "objective {kind} needs {expected} elements, element {} is {}",
            e.id,
            e.kind()
        )));
    }
    Ok(match kind {
        ObjectiveKind::Keywords => Arc::new(KeywordCoverage),
        ObjectiveKind::Logdet => {
            check_dimensions(&data.elements)?;
            Arc::new(LogDet::new(alpha))
        }
        ObjectiveKind::Modular => Arc::new(Modular),
        ObjectiveKind::Coverage => match &data.coverage_weights {
            Some(w) => Arc::new(WeightedCoverage::new(w.clone())),
            None => {
                let top = data
                    .elements
                    .iter()
                    .filter_map(|e| match &e.payload {
                        crate::element::Payload::Coverage(c) => c.covered.iter().max().copied(),
                        _ => None,
                    })
                    .max()
                    .map_or(0, |u| u + 1);
                Arc::new(WeightedCoverage::unit(top))
            }
        },
    })
}

fn check_dimensions(elements: &[Element<f64>]) -> Result<(), HarnessError> {
    let dims = |e: &Element<f64>| match &e.payload {
        crate::element::Payload::Embedding(v) => v.coords.len(),
        _ => 0,
    };
    if let Some(first) = elements.first() {
        let d = dims(first);
        if let Some(e) = elements.iter().find(|e| dims(e) != d) {
            return Err(HarnessError::Config(format!(
                "element {} has dimension {}, expected {d}",
                e.id,
                dims(e)
            )));
        }
    }
    Ok(())
}

fn oracle_failure(e: OracleError) -> HarnessError {
    match e {
        OracleError::MixedPayload { .. } | OracleError::DimensionMismatch { .. } => {
            HarnessError::Config(e.to_string())
        }
        _ => HarnessError::Internal(e.to_string()),
    }
}

impl From<StreamError> for HarnessError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Oracle(o) => oracle_failure(o),
            StreamError::Param(p) => HarnessError::Param(p),
            StreamError::Closed(_) => HarnessError::Internal(e.to_string()),
        }
    }
}

impl From<MultiSourceError> for HarnessError {
    fn from(e: MultiSourceError) -> Self {
        match e {
            MultiSourceError::Oracle(o) => oracle_failure(o),
            MultiSourceError::Param(p) => HarnessError::Param(p),
            MultiSourceError::MixedSources { .. } => HarnessError::Config(e.to_string()),
        }
    }
}

/// Loads the data and runs the configured algorithm.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let data = load_dataset(config)?;
    run_experiment_on(config, &data)
}

/// Runs the configured algorithm on an already loaded ground set.
///
/// Everything except `wall_ms` is a pure function of the config and the
/// data. Reference solvers report only utility.
pub fn run_experiment_on(
    config: &ExperimentConfig,
    data: &Dataset,
) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let objective = build_objective(config.objective, config.alpha, data)?;
    let oracle = InstrumentedOracle::new(objective.clone(), config.k);
    let stream = data.elements.iter().cloned();
    let start = Instant::now();

    let streamed = |alg: &mut dyn StreamingAlgorithm<f64>| -> Result<(Solution<f64>, u64), HarnessError> {
        let sol = run_stream(alg, &oracle, stream.clone())?;
        Ok((sol, alg.peak_stored() as u64))
    };

    let mut events = Vec::new();
    let mut communication = (0, 0);
    let (solution, peak) = match config.algorithm {
        Algorithm::Sieve => streamed(&mut SieveStreaming::classic(config.k, config.epsilon)?)?,
        Algorithm::Sievepp => streamed(&mut SieveStreaming::plus_plus(config.k, config.epsilon)?)?,
        Algorithm::Preemption => streamed(&mut PreemptionStreaming::new(config.k)?)?,
        Algorithm::BatchSievepp | Algorithm::SampleOne if config.m == 1 => {
            let sampler = if config.algorithm == Algorithm::SampleOne {
                InnerSampler::SampleOne
            } else {
                InnerSampler::threshold()
            };
            let mut alg =
                BatchSieveStreaming::new(config.k, config.epsilon, config.buffer(), sampler, config.seed)?;
            let out = streamed(&mut alg)?;
            events = alg.events().to_vec();
            out
        }
        // Buffered algorithms over m streams share the coordinator.
        Algorithm::BatchSievepp | Algorithm::SampleOne | Algorithm::Multisource | Algorithm::Tradeoff => {
            let mut sources: Vec<Vec<Element<f64>>> = vec![Vec::new(); config.m];
            for e in stream {
                sources[e.source as usize % config.m].push(e);
            }
            let ms = MultiSourceConfig {
                k: config.k,
                epsilon: config.epsilon,
                buffer: config.buffer(),
                sampler: if config.algorithm == Algorithm::SampleOne {
                    InnerSampler::SampleOne
                } else {
                    InnerSampler::Threshold {
                        ladder: config.ladder,
                    }
                },
                seed: config.seed,
                interleave: config.interleave,
            };
            let out = multisource_run(&oracle, sources, &ms)?;
            communication = (out.metrics.communication, out.metrics.wasted_communication);
            events = out.flushes;
            (out.solution, out.metrics.peak_memory)
        }
        Algorithm::Greedy => {
            let sol = greedy(objective.as_ref(), &data.elements, config.k).map_err(oracle_failure)?;
            (sol, 0)
        }
        Algorithm::Brute => {
            let res = brute_force_opt(objective.as_ref(), &data.elements, config.k).map_err(|e| match e {
                ExactError::GroundTooLarge(_) => HarnessError::Config(e.to_string()),
                ExactError::Oracle(o) => oracle_failure(o),
            })?;
            (
                Solution {
                    members: res.opt_set,
                    value: res.opt_value,
                },
                0,
            )
        }
    };

    let used = oracle.counters();
    let metrics = RunMetrics {
        utility: solution.value,
        peak_memory: peak,
        queries: used.queries,
        adaptive_rounds: if config.algorithm.is_buffered() {
            events.iter().map(|e| e.rounds).sum()
        } else {
            used.rounds
        },
        communication: communication.0,
        wasted_communication: communication.1,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    debug_assert!(solution.len() <= config.k);
    Ok(ExperimentResult {
        metrics,
        solution,
        n: data.elements.len(),
        events,
    })
}
