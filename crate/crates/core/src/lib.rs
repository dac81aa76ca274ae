//! Streaming submodular maximization under a cardinality constraint.
//!
//! The crate provides threshold-sieve streaming algorithms, a buffered
//! low-adaptivity variant built on randomized threshold sampling, a simulated
//! multi-source coordinator with exact communication accounting, and the
//! experiment harness used to compare them. All algorithms query the
//! objective through an [`InstrumentedOracle`] that meters oracle queries and
//! adaptive rounds.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the harness uses.
//!
//! ```
//! use std::sync::Arc;
//! use sieve_core::oracle::Modular;
//! use sieve_core::{run_stream, Element64, Oracle64, SieveStreaming64};
//!
//! let oracle = Oracle64::new(Arc::new(Modular), 3);
//! let mut alg = SieveStreaming64::plus_plus(3, 0.1).unwrap();
//! let stream = [3.0, 1.0, 4.0, 1.5, 9.0]
//!     .iter()
//!     .enumerate()
//!     .map(|(i, &w)| Element64::weighted(i as u64, w));
//! let best = run_stream(&mut alg, &oracle, stream).unwrap();
//! assert_eq!(best.value, 16.0);
//! assert_eq!(oracle.counters().rounds, 10);
//! ```

// `!(x > 0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod element;
pub mod exact;
pub mod grid;
pub mod harness;
pub mod hybrid;
pub mod metrics;
pub mod multisource;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod sieve;
pub mod solution;
pub mod stream;

pub use element::{CoverageSet, Element, EmbeddingVector, KeywordBag, Payload, PayloadKind, WeightedItem};
pub use exact::{brute_force_opt, greedy, ExactResult};
pub use grid::ThresholdGrid;
pub use hybrid::{BatchSieveStreaming, BufferConfig, InnerSampler};
pub use metrics::RunMetrics;
pub use multisource::{multisource_run, MultiSourceConfig, MultiSourceOutcome};
pub use oracle::{InstrumentedOracle, Objective, OracleCounters, OracleError};
pub use params::ParamError;
pub use sampling::{threshold_sampling, SamplingOutcome, SamplingParams};
pub use scalar::Scalar;
pub use sieve::{PreemptionStreaming, SieveStreaming, SieveVariant};
pub use solution::Solution;
pub use stream::{run_stream, StreamError, StreamingAlgorithm};

pub type Element64 = Element<f64>;
pub type Element32 = Element<f32>;
pub type Oracle64 = InstrumentedOracle<f64>;
pub type Oracle32 = InstrumentedOracle<f32>;
pub type Solution64 = Solution<f64>;
pub type SieveStreaming64 = SieveStreaming<f64>;
pub type BatchSieveStreaming64 = BatchSieveStreaming<f64>;
