use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::generate::{GeneratorKind, GeneratorSpec};
use super::HarnessError;
use crate::element::PayloadKind;
use crate::hybrid::BufferConfig;
use crate::multisource::Interleave;
use crate::params::check_epsilon;

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!("unknown {} {s:?}", stringify!($name).to_lowercase()))
            }
        }
    };
}

named_enum!(Algorithm {
    Sieve => "sieve",
    Sievepp => "sievepp",
    Preemption => "preemption",
    BatchSievepp => "batch_sievepp",
    SampleOne => "sample_one",
    Multisource => "multisource",
    Tradeoff => "tradeoff",
    Greedy => "greedy",
    Brute => "brute",
});

named_enum!(ObjectiveKind {
    Keywords => "keywords",
    Logdet => "logdet",
    Coverage => "coverage",
    Modular => "modular",
});

impl Algorithm {
    pub fn is_multisource(self) -> bool {
        matches!(self, Algorithm::Multisource | Algorithm::Tradeoff)
    }

    /// Algorithms that can run over `m > 1` streams. Sample-One does so on
    /// the multi-source coordinator, as the baseline for `multisource`.
    pub fn accepts_streams(self) -> bool {
        self.is_multisource() || self == Algorithm::SampleOne
    }

    pub fn is_buffered(self) -> bool {
        matches!(
            self,
            Algorithm::BatchSievepp | Algorithm::SampleOne | Algorithm::Multisource | Algorithm::Tradeoff
        )
    }

    /// Reference solvers run outside the metered streaming model.
    pub fn is_reference(self) -> bool {
        matches!(self, Algorithm::Greedy | Algorithm::Brute)
    }
}

impl ObjectiveKind {
    pub fn payload_kind(self) -> PayloadKind {
        match self {
            ObjectiveKind::Keywords => PayloadKind::Keywords,
            ObjectiveKind::Logdet => PayloadKind::Embedding,
            ObjectiveKind::Coverage => PayloadKind::Coverage,
            ObjectiveKind::Modular => PayloadKind::Weighted,
        }
    }

    /// Generator producing payloads this objective accepts.
    pub fn generator(self) -> GeneratorKind {
        match self {
            ObjectiveKind::Keywords => GeneratorKind::ZipfTweets,
            ObjectiveKind::Logdet => GeneratorKind::GaussianVectors,
            ObjectiveKind::Coverage => GeneratorKind::PlantedCoverage,
            ObjectiveKind::Modular => GeneratorKind::Modular,
        }
    }

    /// Stream count of the generated analogue in multi-source runs: 30 for
    /// tweets, 10 otherwise.
    pub fn default_streams(self) -> usize {
        match self {
            ObjectiveKind::Keywords => 30,
            _ => 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Tweets(PathBuf),
    Vectors(PathBuf),
    /// Generated instance; its seed and stream count are taken from the
    /// experiment config.
    Generate(GeneratorSpec),
}

impl DataSource {
    /// Stable description used in run ids.
    pub fn identity(&self) -> String {
        match self {
            DataSource::Tweets(p) => format!("tweets:{}", p.display()),
            DataSource::Vectors(p) => format!("vectors:{}", p.display()),
            DataSource::Generate(g) => format!(
                "gen:{}:n={}:v={}:d={}:c={}:z={}:r={}:kw={}",
                g.kind,
                g.n,
                g.vocabulary,
                g.dimensions,
                g.clusters,
                g.zipf_exponent.to_bits(),
                g.retweet_shape.to_bits(),
                g.max_keywords
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub objective: ObjectiveKind,
    pub k: usize,
    pub epsilon: f64,
    pub capacity: usize,
    pub trigger_fraction: f64,
    /// Number of stream machines; elements go to machine `source mod m`.
    pub m: usize,
    /// Prefix-ladder length, `tradeoff` only.
    pub ladder: usize,
    /// Log-determinant kernel scale.
    pub alpha: f64,
    pub seed: u64,
    pub interleave: Interleave,
    pub data: DataSource,
}

impl ExperimentConfig {
    /// Defaults: `k = 50`, `ε = 0.7`, buffer 100 with trigger 0.8, one
    /// stream, `R = 1`, `α = 1`, on a generated instance of `n` elements.
    pub fn new(algorithm: Algorithm, objective: ObjectiveKind, n: usize) -> Self {
        let m = if algorithm.is_multisource() {
            objective.default_streams()
        } else {
            1
        };
        ExperimentConfig {
            algorithm,
            objective,
            k: 50,
            epsilon: 0.7,
            capacity: 100,
            trigger_fraction: 0.8,
            m,
            ladder: 1,
            alpha: 1.0,
            seed: 0,
            interleave: Interleave::RoundRobin,
            data: DataSource::Generate(GeneratorSpec::new(objective.generator(), n, 0)),
        }
    }

    pub fn buffer(&self) -> BufferConfig {
        BufferConfig {
            capacity: self.capacity,
            trigger_fraction: self.trigger_fraction,
        }
    }

    /// Generator spec with seed and stream count filled in from the config.
    pub fn generator_spec(&self) -> Option<GeneratorSpec> {
        match &self.data {
            DataSource::Generate(g) => Some(GeneratorSpec {
                seed: self.seed,
                sources: self.m as u32,
                ..*g
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        check_epsilon(self.epsilon)?;
        self.buffer().validate()?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive and finite, got {}", self.alpha));
        }
        if self.ladder == 0 {
            return bad("R must be at least 1".into());
        }
        if self.ladder > 1 && self.algorithm != Algorithm::Tradeoff {
            return bad(format!("R = {} is only meaningful for tradeoff", self.ladder));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.m > 1 && !self.algorithm.accepts_streams() {
            return bad(format!("m = {} needs multisource, tradeoff or sample_one", self.m));
        }
        if let DataSource::Generate(g) = &self.data {
            if g.kind != self.objective.generator() {
                return bad(format!(
                    "objective {} cannot read {} instances",
                    self.objective, g.kind
                ));
            }
        }
        Ok(())
    }
}
