//! Experiment harness: dataset loading, synthetic instances, single runs,
//! parameter sweeps and the metrics CSV.
//!
//! Seeds fan out from one master seed through [`crate::rng::derive_seed`]:
//! `[GENERATOR, kind]` draws the instance, `[GENERATOR, 0]` assigns
//! elements to streams, `[INTERLEAVE]` orders multi-source arrivals and
//! `[SAMPLING, flush, exponent]` drives each sampler call.

mod config;
pub mod data;
mod experiment;
pub mod generate;
mod sweep;

use std::collections::HashMap;

use thiserror::Error;

pub use config::{Algorithm, DataSource, ExperimentConfig, ObjectiveKind};
pub use data::{load_tweets, load_vectors, DataError, TweetCorpus, Vocabulary};
pub use experiment::{load_dataset, run_experiment, run_experiment_on, ExperimentResult};
pub use generate::{generate, GeneratorKind, GeneratorSpec};
pub use sweep::{
    append_rows, read_rows, select_columns, sweep, MetricsRow, SweepSpec, COLUMNS, SCHEMA_LINE,
};

use crate::element::Element;
use crate::params::ParamError;

/// A ground set plus whatever the objective needs beyond the elements.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub elements: Vec<Element<f64>>,
    /// Universe weights for coverage objectives; unit weights when absent.
    pub coverage_weights: Option<HashMap<u32, f64>>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("data error: {0}")]
    Data(#[from] DataError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    /// Process exit code: 2 configuration, 3 data, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Param(_) | HarnessError::Io(_) => 2,
            HarnessError::Data(_) => 3,
            HarnessError::Internal(_) => 4,
        }
    }
}
