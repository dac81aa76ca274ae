//! Seeded synthetic instances.
//!
//! Distributional knobs are fields of [`GeneratorSpec`]; the defaults are the
//! ones used by the acceptance corpus. Every draw comes from generators
//! derived from `spec.seed`, and stream assignment uses its own generator, so
//! changing `sources` re-partitions a corpus without changing its elements.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Pareto, Zipf};
use serde::Serialize;

use super::data::{tweets_from_records, TweetRecord};
use super::{Dataset, HarnessError};
use crate::element::{Element, Payload};
use crate::rng::{purpose, rng_for};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    ZipfTweets,
    GaussianVectors,
    PlantedCoverage,
    Modular,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::ZipfTweets,
        GeneratorKind::GaussianVectors,
        GeneratorKind::PlantedCoverage,
        GeneratorKind::Modular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::ZipfTweets => "zipf_tweets",
            GeneratorKind::GaussianVectors => "gaussian_vectors",
            GeneratorKind::PlantedCoverage => "planted_coverage",
            GeneratorKind::Modular => "modular",
        }
    }

    fn label(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown generator {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    /// Tweet vocabulary size, or coverage universe size.
    pub vocabulary: usize,
    /// Embedding dimension.
    pub dimensions: usize,
    /// Gaussian cluster count.
    pub clusters: usize,
    /// Zipf exponent of keyword popularity.
    pub zipf_exponent: f64,
    /// Pareto shape of retweet counts (smaller is heavier-tailed).
    pub retweet_shape: f64,
    /// Keywords per tweet are uniform in `1..=max_keywords`.
    pub max_keywords: usize,
    /// Elements are assigned uniformly to streams `0..sources`.
    pub sources: u32,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            kind,
            n,
            vocabulary: match kind {
                GeneratorKind::PlantedCoverage => 24,
                _ => 1000,
            },
            dimensions: 4,
            clusters: 10,
            zipf_exponent: 1.1,
            retweet_shape: 2.0,
            max_keywords: 5,
            sources: 1,
            seed,
        }
    }

    pub fn with_sources(mut self, sources: u32) -> Self {
        self.sources = sources;
        self
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_owned()));
        if self.n == 0 {
            return bad("generator needs n >= 1");
        }
        if self.sources == 0 {
            return bad("generator needs at least one source");
        }
        match self.kind {
            GeneratorKind::ZipfTweets => {
                if self.vocabulary == 0 || self.max_keywords == 0 {
                    return bad("zipf_tweets needs vocabulary >= 1 and max_keywords >= 1");
                }
                if !(self.zipf_exponent >= 0.0) || !(self.retweet_shape > 0.0) {
                    return bad("zipf_tweets needs zipf_exponent >= 0 and retweet_shape > 0");
                }
            }
            GeneratorKind::GaussianVectors => {
                if self.dimensions == 0 || self.clusters == 0 {
                    return bad("gaussian_vectors needs dimensions >= 1 and clusters >= 1");
                }
            }
            GeneratorKind::PlantedCoverage => {
                if self.vocabulary == 0 {
                    return bad("planted_coverage needs a universe of at least one item");
                }
            }
            GeneratorKind::Modular => {}
        }
        Ok(())
    }
}

/// Builds the instance described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset, HarnessError> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, &[purpose::GENERATOR, spec.kind.label()]);
    let mut coverage_weights = None;
    let mut elements = match spec.kind {
        GeneratorKind::ZipfTweets => {
            let records = tweet_records(spec)?;
            tweets_from_records(records)
                .map_err(|e| HarnessError::Internal(e.to_string()))?
                .elements
        }
        GeneratorKind::GaussianVectors => {
            let spread = Normal::new(0.0, 3.0).expect("valid normal");
            let noise = Normal::new(0.0, 1.0).expect("valid normal");
            let centers: Vec<Vec<f64>> = (0..spec.clusters)
                .map(|_| (0..spec.dimensions).map(|_| spread.sample(&mut rng)).collect())
                .collect();
            (0..spec.n)
                .map(|i| {
                    let c = &centers[rng.random_range(0..spec.clusters)];
                    let coords = c.iter().map(|&x| x + noise.sample(&mut rng)).collect();
                    Element::embedding(i as u64, coords)
                })
                .collect()
        }
        GeneratorKind::PlantedCoverage => {
            let (elements, weights) = planted_coverage(spec, &mut rng);
            coverage_weights = Some(weights);
            elements
        }
        GeneratorKind::Modular => {
            let exp = Exp::new(1.0).expect("valid rate");
            (0..spec.n)
                .map(|i| Element::weighted(i as u64, exp.sample(&mut rng)))
                .collect()
        }
    };
    if spec.kind != GeneratorKind::ZipfTweets {
        let mut srng = rng_for(spec.seed, &[purpose::GENERATOR, 0]);
        for e in &mut elements {
            e.source = srng.random_range(0..spec.sources);
        }
    }
    Ok(Dataset {
        elements,
        coverage_weights,
    })
}

/// Tweet records behind a `zipf_tweets` instance.
pub fn tweet_records(spec: &GeneratorSpec) -> Result<Vec<TweetRecord>, HarnessError> {
    spec.validate()?;
    if spec.kind != GeneratorKind::ZipfTweets {
        return Err(HarnessError::Config(format!("{} does not produce tweets", spec.kind)));
    }
    let mut rng = rng_for(spec.seed, &[purpose::GENERATOR, spec.kind.label()]);
    let mut srng = rng_for(spec.seed, &[purpose::GENERATOR, 0]);
    let zipf = Zipf::new(spec.vocabulary as f64, spec.zipf_exponent)
        .map_err(|e| HarnessError::Config(format!("zipf: {e}")))?;
    let pareto = Pareto::new(1.0, spec.retweet_shape)
        .map_err(|e| HarnessError::Config(format!("pareto: {e}")))?;
    Ok((0..spec.n)
        .map(|i| {
            let count = rng.random_range(1..=spec.max_keywords);
            let keywords = (0..count)
                .map(|_| format!("w{}", zipf.sample(&mut rng) as u64 - 1))
                .collect();
            let retweets = pareto.sample(&mut rng).floor().min(1e6) as i64;
            TweetRecord {
                id: i as u64,
                keywords,
                retweets,
                source: srng.random_range(0..spec.sources),
            }
        })
        .collect())
}

/// A few disjoint heavy sets hidden among random light ones.
///
/// `min(4, n)` planted sets each cover their own block of three items of
/// weight 4; every other set covers one to three items drawn from the whole
/// universe, whose remaining items weigh 1 to 3. Element order is shuffled.
fn planted_coverage<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> (Vec<Element<f64>>, HashMap<u32, f64>) {
    let planted = spec.n.min(4);
    let universe = spec.vocabulary.max(3 * planted + 1) as u32;
    let heavy = 3 * planted as u32;
    let weights: HashMap<u32, f64> = (0..universe)
        .map(|u| {
            let w = if u < heavy { 4.0 } else { rng.random_range(1..=3) as f64 };
            (u, w)
        })
        .collect();
    let mut sets: Vec<Vec<u32>> = (0..planted as u32)
        .map(|b| vec![3 * b, 3 * b + 1, 3 * b + 2])
        .collect();
    for _ in planted..spec.n {
        let size = rng.random_range(1..=3);
        sets.push((0..size).map(|_| rng.random_range(0..universe)).collect());
    }
    sets.shuffle(rng);
    let elements = sets
        .into_iter()
        .enumerate()
        .map(|(i, s)| Element::coverage(i as u64, s))
        .collect();
    (elements, weights)
}

#[derive(Serialize)]
struct WeightedLine {
    id: u64,
    source: u32,
    weight: f64,
}

#[derive(Serialize)]
struct CoverageLine<'a> {
    id: u64,
    source: u32,
    covered: &'a [u32],
}

#[derive(Serialize)]
struct UniverseLine {
    item: u32,
    weight: f64,
}

/// Writes a generated instance.
///
/// Tweets are written as JSON lines and vectors as CSV, both in the formats
/// the loaders read back. Coverage instances are JSON lines of sets followed
/// by one line per universe item; modular instances are JSON lines of
/// weights.
pub fn write_instance<W: Write>(spec: &GeneratorSpec, out: &mut W) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    let json = |e: serde_json::Error| HarnessError::Internal(e.to_string());
    if spec.kind == GeneratorKind::ZipfTweets {
        for rec in tweet_records(spec)? {
            serde_json::to_writer(&mut *out, &rec).map_err(json)?;
            writeln!(out).map_err(io)?;
        }
        return Ok(());
    }
    let data = generate(spec)?;
    match spec.kind {
        GeneratorKind::GaussianVectors => {
            let mut w = csv::Writer::from_writer(&mut *out);
            let mut header = vec!["id".to_owned(), "source".to_owned()];
            header.extend((0..spec.dimensions).map(|j| format!("x{j}")));
            w.write_record(&header).map_err(|e| HarnessError::Io(e.to_string()))?;
            for e in &data.elements {
                if let Payload::Embedding(v) = &e.payload {
                    let mut row = vec![e.id.to_string(), e.source.to_string()];
                    row.extend(v.coords.iter().map(|x| x.to_string()));
                    w.write_record(&row).map_err(|e| HarnessError::Io(e.to_string()))?;
                }
            }
            w.flush().map_err(io)?;
        }
        GeneratorKind::PlantedCoverage => {
            for e in &data.elements {
                if let Payload::Coverage(c) = &e.payload {
                    let line = CoverageLine {
                        id: e.id,
                        source: e.source,
                        covered: &c.covered,
                    };
                    serde_json::to_writer(&mut *out, &line).map_err(json)?;
                    writeln!(out).map_err(io)?;
                }
            }
            let weights = data.coverage_weights.unwrap_or_default();
            let mut items: Vec<_> = weights.into_iter().collect();
            items.sort_by_key(|&(u, _)| u);
            for (item, weight) in items {
                serde_json::to_writer(&mut *out, &UniverseLine { item, weight }).map_err(json)?;
                writeln!(out).map_err(io)?;
            }
        }
        GeneratorKind::Modular => {
            for e in &data.elements {
                if let Payload::Weighted(w) = &e.payload {
                    let line = WeightedLine {
                        id: e.id,
                        source: e.source,
                        weight: w.weight,
                    };
                    serde_json::to_writer(&mut *out, &line).map_err(json)?;
                    writeln!(out).map_err(io)?;
                }
            }
        }
        GeneratorKind::ZipfTweets => unreachable!(),
    }
    Ok(())
}
