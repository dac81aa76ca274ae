use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sieve_core::harness::data::summarize;
use sieve_core::harness::generate::write_instance;
use sieve_core::harness::{
    append_rows, load_tweets, load_vectors, run_experiment, select_columns, sweep, Algorithm,
    DataSource, ExperimentConfig, GeneratorKind, GeneratorSpec, HarnessError, MetricsRow,
    ObjectiveKind, SweepSpec,
};
use sieve_core::multisource::Interleave;

#[derive(Parser)]
#[command(name = "sievebench", version, about = "Streaming submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its metrics.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Append the metrics row to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the ids of the selected elements.
        #[arg(long)]
        dump: bool,
    },
    /// Run the cartesian product of the listed axes and append rows to a CSV file.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        algorithms: Vec<Algorithm>,
        #[arg(long = "ks", value_delimiter = ',')]
        ks: Vec<usize>,
        #[arg(long = "epsilons", value_delimiter = ',')]
        epsilons: Vec<f64>,
        #[arg(long = "capacities", value_delimiter = ',')]
        capacities: Vec<usize>,
        #[arg(long = "ladders", value_delimiter = ',')]
        ladders: Vec<usize>,
        /// Seeds as a list `1,2,3` or a half-open range `0..20`.
        #[arg(long, default_value = "0")]
        seeds: String,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated instance.
    Gen {
        #[arg(long)]
        kind: GeneratorKind,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        sources: u32,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a dataset file and summarize it.
    Validate {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Run a buffered algorithm and print one line per buffer flush.
    Trace {
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Print selected columns of a metrics CSV in gnuplot layout.
    Columns {
        file: PathBuf,
        #[arg(required = true)]
        names: Vec<String>,
    },
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct DataArgs {
    /// JSON-lines tweets file.
    #[arg(long)]
    tweets: Option<PathBuf>,
    /// CSV vectors file.
    #[arg(long)]
    vectors: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GenArgs {
    /// Number of generated elements.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long)]
    vocabulary: Option<usize>,
    #[arg(long, default_value_t = 4)]
    dimensions: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 1.1)]
    zipf_exponent: f64,
    #[arg(long, default_value_t = 2.0)]
    retweet_shape: f64,
    #[arg(long, default_value_t = 5)]
    max_keywords: usize,
}

impl GenArgs {
    fn spec(&self, kind: GeneratorKind, seed: u64) -> GeneratorSpec {
        let base = GeneratorSpec::new(kind, self.n, seed);
        GeneratorSpec {
            vocabulary: self.vocabulary.unwrap_or(base.vocabulary),
            dimensions: self.dimensions,
            clusters: self.clusters,
            zipf_exponent: self.zipf_exponent,
            retweet_shape: self.retweet_shape,
            max_keywords: self.max_keywords,
            ..base
        }
    }
}

#[derive(Args, Clone)]
struct ExpArgs {
    #[arg(long, default_value = "sievepp")]
    algorithm: Algorithm,
    #[arg(long, default_value = "modular")]
    objective: ObjectiveKind,
    #[arg(short, long, default_value_t = 50)]
    k: usize,
    #[arg(short, long, default_value_t = 0.7)]
    epsilon: f64,
    /// Buffer capacity per stream.
    #[arg(long, default_value_t = 100)]
    capacity: usize,
    #[arg(long, default_value_t = 0.8)]
    trigger: f64,
    /// Stream count; defaults to 30 for keywords and 10 otherwise in
    /// multi-source runs, 1 elsewhere. Sample-One accepts m > 1 and then
    /// runs on the multi-source coordinator.
    #[arg(short, long)]
    m: Option<usize>,
    /// Prefix-ladder length (tradeoff only).
    #[arg(short = 'R', long = "ladder", default_value_t = 1)]
    ladder: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Arrival order across streams: round-robin or seeded.
    #[arg(long, default_value = "round-robin", value_parser = parse_interleave)]
    interleave: Interleave,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    gen: GenArgs,
}

fn parse_interleave(s: &str) -> Result<Interleave, String> {
    match s {
        "round-robin" => Ok(Interleave::RoundRobin),
        "seeded" => Ok(Interleave::Seeded),
        _ => Err(format!("unknown interleave {s:?}")),
    }
}

impl ExpArgs {
    fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.algorithm, self.objective, self.gen.n);
        c.k = self.k;
        c.epsilon = self.epsilon;
        c.capacity = self.capacity;
        c.trigger_fraction = self.trigger;
        if let Some(m) = self.m {
            c.m = m;
        }
        c.ladder = self.ladder;
        c.alpha = self.alpha;
        c.seed = self.seed;
        c.interleave = self.interleave;
        c.data = match (&self.data.tweets, &self.data.vectors) {
            (Some(p), _) => DataSource::Tweets(p.clone()),
            (_, Some(p)) => DataSource::Vectors(p.clone()),
            _ => DataSource::Generate(self.gen.spec(self.objective.generator(), self.seed)),
        };
        c
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Config(format!("bad seed list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn or_default<T>(v: Vec<T>, d: T) -> Vec<T> {
    if v.is_empty() {
        vec![d]
    } else {
        v
    }
}

fn io_err(e: io::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

fn print_metrics(config: &ExperimentConfig, row: &MetricsRow) -> io::Result<()> {
    let m = &row.metrics;
    let mut out = io::stdout().lock();
    let na = |x: u64| {
        if config.algorithm.is_reference() {
            "n/a".to_owned()
        } else {
            x.to_string()
        }
    };
    writeln!(out, "algorithm            {}", row.algorithm)?;
    writeln!(out, "objective            {}", row.objective)?;
    writeln!(out, "n                    {}", row.n)?;
    writeln!(out, "utility              {}", m.utility)?;
    writeln!(out, "peak_memory          {}", na(m.peak_memory))?;
    writeln!(out, "queries              {}", na(m.queries))?;
    writeln!(out, "rounds               {}", na(m.adaptive_rounds))?;
    writeln!(out, "communication        {}", na(m.communication))?;
    writeln!(out, "wasted_communication {}", na(m.wasted_communication))?;
    writeln!(out, "wall_ms              {}", m.wall_ms)?;
    writeln!(out, "run_id               {}", row.run_id)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { exp, out, dump } => {
            let config = exp.config();
            let result = run_experiment(&config)?;
            let row = MetricsRow::new(&config, &result);
            print_metrics(&config, &row).map_err(io_err)?;
            if dump {
                let ids: Vec<String> = result.solution.ids().iter().map(u64::to_string).collect();
                println!("solution             {}", ids.join(" "));
            }
            if let Some(path) = out {
                append_rows(&path, &[row])?;
            }
        }
        Command::Sweep {
            exp,
            algorithms,
            ks,
            epsilons,
            capacities,
            ladders,
            seeds,
            jobs,
            out,
        } => {
            let base = exp.config();
            let spec = SweepSpec {
                algorithms,
                ks: or_default(ks, base.k),
                epsilons: or_default(epsilons, base.epsilon),
                capacities: or_default(capacities, base.capacity),
                ladders: or_default(ladders, base.ladder),
                seeds: parse_seeds(&seeds)?,
                jobs,
                base,
            };
            let rows = sweep(&spec)?;
            append_rows(&out, &rows)?;
            eprintln!("{} rows appended to {}", rows.len(), out.display());
        }
        Command::Gen {
            kind,
            gen,
            seed,
            sources,
            out,
        } => {
            let spec = gen.spec(kind, seed).with_sources(sources);
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
                    write_instance(&spec, &mut w)?;
                    w.flush().map_err(io_err)?;
                }
                None => {
                    let mut w = BufWriter::new(io::stdout().lock());
                    write_instance(&spec, &mut w)?;
                    w.flush().map_err(io_err)?;
                }
            }
        }
        Command::Validate { data } => {
            let elements = match (data.tweets, data.vectors) {
                (Some(p), _) => load_tweets(&p)?.elements,
                (_, Some(p)) => load_vectors(&p)?,
                _ => return Err(HarnessError::Config("pass --tweets or --vectors".into())),
            };
            let s = summarize(&elements);
            println!("elements  {}", s.elements);
            println!("kind      {}", s.kind.map_or("-".to_owned(), |k| k.to_string()));
            println!("sources   {}", s.sources);
            if let Some(d) = s.dimension {
                println!("dimension {d}");
            }
        }
        Command::Trace { exp } => {
            let config = exp.config();
            if !config.algorithm.is_buffered() {
                return Err(HarnessError::Config(format!(
                    "{} has no buffer flushes to trace",
                    config.algorithm
                )));
            }
            let result = run_experiment(&config)?;
            let mut out = io::stdout().lock();
            for e in &result.events {
                writeln!(out, "{e}").map_err(io_err)?;
            }
            writeln!(
                out,
                "utility={} flushes={} rounds={} communication={}",
                result.metrics.utility,
                result.events.len(),
                result.metrics.adaptive_rounds,
                result.metrics.communication
            )
            .map_err(io_err)?;
        }
        Command::Columns { file, names } => {
            let f = File::open(&file).map_err(|e| {
                HarnessError::Data(sieve_core::harness::DataError::Io {
                    path: file.display().to_string(),
                    source: e,
                })
            })?;
            let mut out = BufWriter::new(io::stdout().lock());
            select_columns(f, &names, &mut out)?;
            out.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| execute(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
