use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndkv::bench::{
    generate_dataset, generate_query, run_benchmark_with, write_records, Algo, BenchConfig,
    Distribution,
};
use ndkv::io::{load_csv, load_structure, save_structure, write_csv};
use ndkv::{brute_force_search, BuildConfig, KdTree, PreprocessedDatabase, RangeQuery, Variant};

#[derive(Parser)]
#[command(
    name = "ndkv",
    version,
    about = "Orthogonal range search with the n-dimensional k-vector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        distribution: Distribution,
        #[arg(long)]
        output: PathBuf,
    },
    /// Preprocess a CSV dataset into a structure file.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        shape: Shape,
    },
    /// Run one box query against a structure file; prints matching ids.
    Query {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        range: String,
        /// Print the number of matches only.
        #[arg(long)]
        count: bool,
    },
    /// Time all algorithms over a grid of sizes, dimensions and fractions.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100000")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "6")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        fraction: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        algo: Vec<Algo>,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        distribution: Distribution,
        #[arg(long)]
        ndb: Option<usize>,
        #[arg(long)]
        nk: Option<usize>,
        /// Also time the full structure searched concurrently per
        /// sub-database (reported as `ndkv-parallel`).
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Cross-check every algorithm against the linear scan on random queries.
    Verify {
        /// CSV dataset; a uniform one is generated when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.0001,0.001,0.01,0.1,1")]
        fraction: Vec<f64>,
        /// Queries per fraction.
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        shape: Shape,
    },
}

#[derive(Args)]
struct Shape {
    #[arg(long)]
    ndb: Option<usize>,
    #[arg(long)]
    nk: Option<usize>,
    #[arg(long, default_value = "full")]
    variant: Variant,
}

impl Shape {
    fn config(&self) -> BuildConfig {
        BuildConfig {
            n_db: self.ndb,
            n_k: self.nk,
            variant: self.variant,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> ndkv::Result<()> {
    match command {
        Command::Generate {
            n,
            d,
            seed,
            distribution,
            output,
        } => {
            if n == 0 || d == 0 {
                return Err(ndkv::Error::InvalidArgument(
                    "--n and --d must be positive".into(),
                ));
            }
            write_csv(&generate_dataset(n, d, distribution, seed), output)
        }
        Command::Build {
            input,
            output,
            shape,
        } => {
            let ds = load_csv(&input)?;
            let t = Instant::now();
            let pre = PreprocessedDatabase::build(&ds, &shape.config())?;
            let elapsed = t.elapsed();
            save_structure(&pre, &output)?;
            eprintln!(
                "built {} variant: n={} d={} n_db={} n_k={} in {:.3?}",
                pre.variant(),
                pre.len(),
                pre.dims(),
                pre.n_db(),
                pre.n_k(),
                elapsed
            );
            Ok(())
        }
        Command::Query {
            input,
            range,
            count,
        } => {
            let pre = load_structure(&input)?;
            let q = RangeQuery::parse(&range)?;
            let hits = pre.search(&q)?.sorted();
            let mut out = BufWriter::new(io::stdout().lock());
            if count {
                writeln!(out, "{}", hits.len())?;
            } else {
                for id in hits.ids {
                    writeln!(out, "{id}")?;
                }
            }
            out.flush()?;
            Ok(())
        }
        Command::Bench {
            n,
            d,
            fraction,
            algo,
            repeats,
            seed,
            distribution,
            ndb,
            nk,
            parallel,
            csv_out,
        } => {
            let mut algos = if algo.is_empty() {
                Algo::DEFAULT.to_vec()
            } else {
                algo
            };
            if parallel && !algos.contains(&Algo::NdkvParallel) {
                algos.push(Algo::NdkvParallel);
            }
            let cfg = BenchConfig {
                sizes: n,
                dims: d,
                fractions: fraction,
                algos,
                repeats,
                seed,
                distribution,
                build: BuildConfig {
                    n_db: ndb,
                    n_k: nk,
                    variant: Variant::Full,
                },
            };
            let records = run_benchmark_with(&cfg, |r| {
                eprintln!(
                    "{:<18} n={:<8} d={:<3} f={:<8} k={:<8} mean={:.3e}s examined={}",
                    r.algo, r.n, r.d, r.fraction, r.retrieved, r.mean_time, r.examined
                );
            })?;
            match csv_out {
                Some(path) => write_records(&records, File::create(path)?),
                None => write_records(&records, io::stdout().lock()),
            }
        }
        Command::Verify {
            input,
            n,
            d,
            fraction,
            repeats,
            seed,
            shape,
        } => {
            let ds = match input {
                Some(path) => load_csv(path)?,
                None => generate_dataset(n, d, Distribution::Uniform, seed),
            };
            let build = shape.config();
            let structures = Variant::ALL
                .into_iter()
                .map(|v| PreprocessedDatabase::build(&ds, &build.with_variant(v)))
                .collect::<ndkv::Result<Vec<_>>>()?;
            let tree = KdTree::build(&ds);
            let mut checked = 0;
            for (i, &f) in fraction.iter().enumerate() {
                for r in 0..repeats {
                    let q = generate_query(&ds, f, seed ^ ((i as u64) << 32) ^ r as u64);
                    let expected = brute_force_search(&ds, &q)?.sorted();
                    let mut check = |algo: &str, got: ndkv::QueryResult| {
                        let got = got.sorted();
                        if got != expected {
                            return Err(ndkv::Error::ResultMismatch {
                                algo: algo.to_string(),
                                expected: expected.len(),
                                found: got.len(),
                                context: format!("fraction={f} query={q:?}"),
                            });
                        }
                        checked += 1;
                        Ok(())
                    };
                    for pre in &structures {
                        check(pre.variant().name(), pre.search(&q)?)?;
                    }
                    check("kdtree", tree.search(&q)?)?;
                }
            }
            eprintln!("ok: {checked} result sets match the linear scan");
            Ok(())
        }
    }
}
