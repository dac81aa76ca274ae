//! Cartesian sweeps and the metrics CSV.
//!
//! The file starts with [`SCHEMA_LINE`], then a header of [`COLUMNS`]. Reals
//! are written with 17 significant digits so every value reads back
//! bit-identically. The trailing `run_id` is a hash of the full config, so
//! rows appended by a rerun can be matched against earlier ones.

use std::fs::OpenOptions;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::config::{Algorithm, ExperimentConfig};
use super::experiment::{load_dataset, run_experiment_on, ExperimentResult};
use super::HarnessError;
use crate::metrics::RunMetrics;

pub const SCHEMA_LINE: &str = "# schema=1";

pub const COLUMNS: [&str; 18] = [
    "algorithm",
    "objective",
    "n",
    "k",
    "epsilon",
    "capacity",
    "trigger",
    "m",
    "R",
    "seed",
    "utility",
    "peak_memory",
    "queries",
    "rounds",
    "communication",
    "wasted_communication",
    "wall_ms",
    "run_id",
];

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub algorithm: String,
    pub objective: String,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub capacity: usize,
    pub trigger: f64,
    pub m: usize,
    pub r: usize,
    pub seed: u64,
    pub metrics: RunMetrics,
    pub run_id: String,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Hash of every input that affects a run.
pub fn run_id(config: &ExperimentConfig) -> String {
    let key = format!(
        "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{:?}|{}",
        config.algorithm,
        config.objective,
        config.k,
        config.epsilon.to_bits(),
        config.capacity,
        config.trigger_fraction.to_bits(),
        config.m,
        config.ladder,
        config.alpha.to_bits(),
        config.seed,
        config.interleave,
        config.data.identity()
    );
    format!("{:016x}", fnv1a(key.as_bytes()))
}

impl MetricsRow {
    pub fn new(config: &ExperimentConfig, result: &ExperimentResult) -> Self {
        MetricsRow {
            algorithm: config.algorithm.to_string(),
            objective: config.objective.to_string(),
            n: result.n,
            k: config.k,
            epsilon: config.epsilon,
            capacity: config.capacity,
            trigger: config.trigger_fraction,
            m: config.m,
            r: config.ladder,
            seed: config.seed,
            metrics: result.metrics,
            run_id: run_id(config),
        }
    }

    pub fn record(&self) -> Vec<String> {
        let m = &self.metrics;
        vec![
            self.algorithm.clone(),
            self.objective.clone(),
            self.n.to_string(),
            self.k.to_string(),
            real(self.epsilon),
            self.capacity.to_string(),
            real(self.trigger),
            self.m.to_string(),
            self.r.to_string(),
            self.seed.to_string(),
            real(m.utility),
            m.peak_memory.to_string(),
            m.queries.to_string(),
            m.adaptive_rounds.to_string(),
            m.communication.to_string(),
            m.wasted_communication.to_string(),
            m.wall_ms.to_string(),
            self.run_id.clone(),
        ]
    }

    fn parse(fields: &csv::StringRecord, line: u64) -> Result<Self, HarnessError> {
        let bad = |what: &str| {
            HarnessError::Data(super::DataError::Malformed {
                line,
                message: format!("bad {what}"),
            })
        };
        if fields.len() != COLUMNS.len() {
            return Err(bad("field count"));
        }
        macro_rules! num {
            ($i:expr) => {
                fields[$i].parse().map_err(|_| bad(COLUMNS[$i]))?
            };
        }
        Ok(MetricsRow {
            algorithm: fields[0].to_owned(),
            objective: fields[1].to_owned(),
            n: num!(2),
            k: num!(3),
            epsilon: num!(4),
            capacity: num!(5),
            trigger: num!(6),
            m: num!(7),
            r: num!(8),
            seed: num!(9),
            metrics: RunMetrics {
                utility: num!(10),
                peak_memory: num!(11),
                queries: num!(12),
                adaptive_rounds: num!(13),
                communication: num!(14),
                wasted_communication: num!(15),
                wall_ms: num!(16),
            },
            run_id: fields[17].to_owned(),
        })
    }
}

/// Axes of a sweep. The ladder axis applies to `tradeoff` only; other
/// algorithms run once with `R = 1`.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub algorithms: Vec<Algorithm>,
    pub ks: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub capacities: Vec<usize>,
    pub ladders: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Worker threads; 0 uses the available parallelism.
    pub jobs: usize,
}

impl SweepSpec {
    pub fn single(base: ExperimentConfig, seeds: Vec<u64>) -> Self {
        SweepSpec {
            algorithms: vec![base.algorithm],
            ks: vec![base.k],
            epsilons: vec![base.epsilon],
            capacities: vec![base.capacity],
            ladders: vec![base.ladder],
            seeds,
            base,
            jobs: 0,
        }
    }

    /// Configs in row order: algorithm, k, ε, capacity, R, seed.
    pub fn configs(&self) -> Result<Vec<ExperimentConfig>, HarnessError> {
        let axes = [
            ("algorithm", self.algorithms.len()),
            ("k", self.ks.len()),
            ("epsilon", self.epsilons.len()),
            ("capacity", self.capacities.len()),
            ("R", self.ladders.len()),
            ("seed", self.seeds.len()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, len)| *len == 0) {
            return Err(HarnessError::Config(format!("sweep axis {name} is empty")));
        }
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            let ladders: &[usize] = if algorithm == Algorithm::Tradeoff {
                &self.ladders
            } else {
                &[1]
            };
            for &k in &self.ks {
                for &epsilon in &self.epsilons {
                    for &capacity in &self.capacities {
                        for &ladder in ladders {
                            for &seed in &self.seeds {
                                let mut c = ExperimentConfig {
                                    algorithm,
                                    k,
                                    epsilon,
                                    capacity,
                                    ladder,
                                    seed,
                                    ..self.base.clone()
                                };
                                if !algorithm.accepts_streams() {
                                    c.m = 1;
                                }
                                c.validate()?;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every config of the sweep; rows come back in config order whatever
/// the worker count.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<MetricsRow>, HarnessError> {
    let configs = spec.configs()?;
    let jobs = match spec.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        j => j,
    }
    .min(configs.len().max(1));

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<MetricsRow, HarnessError>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let c = &configs[i];
                let row = load_dataset(c)
                    .and_then(|data| run_experiment_on(c, &data))
                    .map(|r| MetricsRow::new(c, &r));
                results.lock().expect("worker panicked")[i] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every config ran"))
        .collect()
}

/// Appends rows to a metrics file, writing the schema line and header first
/// when the file is new or empty.
pub fn append_rows(path: &Path, rows: &[MetricsRow]) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io)?;
    let fresh = file.metadata().map_err(io)?.len() == 0;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if fresh {
            w.write_record(COLUMNS).map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        for row in rows {
            w.write_record(row.record()).map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        w.flush().map_err(io)?;
    }
    if fresh {
        writeln!(file, "{SCHEMA_LINE}").map_err(io)?;
    }
    file.write_all(&buf).map_err(io)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(input)
}

/// Reads a metrics file written by [`append_rows`].
pub fn read_rows<R: Read>(input: R) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut rdr = reader(input);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Data(super::DataError::Header(e.to_string())))?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(HarnessError::Data(super::DataError::Header(
            "not a schema=1 metrics file".into(),
        )));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| HarnessError::Data(super::DataError::Header(e.to_string())))?;
            let line = rec.position().map_or(0, |p| p.line());
            MetricsRow::parse(&rec, line)
        })
        .collect()
}

/// Writes the named columns of a metrics file as whitespace-separated text
/// with a `#` header line, the layout gnuplot reads directly.
pub fn select_columns<R: Read, W: Write>(
    input: R,
    names: &[String],
    out: &mut W,
) -> Result<(), HarnessError> {
    let mut rdr = reader(input);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Data(super::DataError::Header(e.to_string())))?
        .clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| HarnessError::Config(format!("no column {n:?}")))
        })
        .collect::<Result<_, _>>()?;
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    writeln!(out, "# {}", names.join(" ")).map_err(io)?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Data(super::DataError::Header(e.to_string())))?;
        let fields: Vec<&str> = idx.iter().map(|&i| &rec[i]).collect();
        writeln!(out, "{}", fields.join(" ")).map_err(io)?;
    }
    Ok(())
}
