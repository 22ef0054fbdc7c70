//! Synthetic workloads and the timing harness behind `ndkv bench`.

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseline::{brute_force_search, KdTree};
use crate::error::{Error, Result};
use crate::model::{Dataset, QueryResult, RangeQuery};
use crate::search::SearchStats;
use crate::structure::{BuildConfig, PreprocessedDatabase, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    /// Independent coordinates, uniform on `[0, 1)`.
    #[default]
    Uniform,
    /// 99% of the points inside one cube of side 10⁻⁴, the rest uniform.
    Clustered,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "clustered" => Ok(Self::Clustered),
            _ => Err(Error::InvalidArgument(format!(
                "unknown distribution {s:?} (expected uniform or clustered)"
            ))),
        }
    }
}

const CLUSTER_SIDE: f64 = 1e-4;
const CLUSTER_SHARE: f64 = 0.99;

pub fn generate_dataset(n: usize, d: usize, dist: Distribution, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * d);
    match dist {
        Distribution::Uniform => coords.extend((0..n * d).map(|_| rng.gen::<f64>())),
        Distribution::Clustered => {
            let corner: Vec<f64> = (0..d)
                .map(|_| rng.gen_range(0.0..1.0 - CLUSTER_SIDE))
                .collect();
            for _ in 0..n {
                if rng.gen_bool(CLUSTER_SHARE) {
                    coords.extend(corner.iter().map(|&c| c + rng.gen::<f64>() * CLUSTER_SIDE));
                } else {
                    coords.extend((0..d).map(|_| rng.gen::<f64>()));
                }
            }
        }
    }
    Dataset::from_flat(d, coords).expect("generated coordinates are finite")
}

/// Builds box queries that select about `f^(1/d)` of the points in every
/// dimension, so the joint fraction is about `f` on independent data.
///
/// Each interval spans a run of `⌈f^(1/d)·n⌉` consecutive order statistics
/// of its column, placed uniformly at random; intervals are therefore
/// clipped to the data hull by construction.
#[derive(Debug, Clone)]
pub struct QueryGenerator {
    columns: Vec<Vec<f64>>,
}

impl QueryGenerator {
    pub fn new(ds: &Dataset) -> Self {
        let columns = (0..ds.dims())
            .map(|j| {
                let mut c = ds.column(j);
                c.sort_unstable_by(f64::total_cmp);
                c
            })
            .collect();
        Self { columns }
    }

    pub fn query<R: Rng>(&self, fraction: f64, rng: &mut R) -> RangeQuery {
        assert!(
            fraction > 0.0 && fraction <= 1.0,
            "fraction must lie in (0, 1], got {fraction}"
        );
        let n = self.columns[0].len();
        let d = self.columns.len();
        let per_dim = fraction.powf(1.0 / d as f64);
        let width = ((per_dim * n as f64).ceil() as usize).clamp(1, n);
        let bounds = self
            .columns
            .iter()
            .map(|c| {
                let start = rng.gen_range(0..=n - width);
                (c[start], c[start + width - 1])
            })
            .collect();
        RangeQuery::new(bounds)
    }
}

pub fn generate_query(ds: &Dataset, fraction: f64, seed: u64) -> RangeQuery {
    QueryGenerator::new(ds).query(fraction, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Ndkv,
    NdkvNoIndex,
    NdkvNoKv,
    NdkvNoKvNoIndex,
    /// Full structure searched with one task per sub-database.
    NdkvParallel,
    Brute,
    KdTree,
}

impl Algo {
    /// The algorithms benchmarked when none are named.
    pub const DEFAULT: [Algo; 5] = [
        Algo::Ndkv,
        Algo::NdkvNoIndex,
        Algo::NdkvNoKv,
        Algo::Brute,
        Algo::KdTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Ndkv => "ndkv",
            Algo::NdkvNoIndex => "ndkv-noindex",
            Algo::NdkvNoKv => "ndkv-nokv",
            Algo::NdkvNoKvNoIndex => "ndkv-nokv-noindex",
            Algo::NdkvParallel => "ndkv-parallel",
            Algo::Brute => "brute",
            Algo::KdTree => "kdtree",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            Algo::Ndkv | Algo::NdkvParallel => Some(Variant::Full),
            Algo::NdkvNoIndex => Some(Variant::NoIndex),
            Algo::NdkvNoKv => Some(Variant::NoKVector),
            Algo::NdkvNoKvNoIndex => Some(Variant::NoKVectorNoIndex),
            Algo::Brute | Algo::KdTree => None,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algo::Ndkv,
            Algo::NdkvNoIndex,
            Algo::NdkvNoKv,
            Algo::NdkvNoKvNoIndex,
            Algo::NdkvParallel,
            Algo::Brute,
            Algo::KdTree,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

/// A searchable instance of one algorithm over one dataset.
pub enum Engine<'a> {
    Ndkv {
        pre: PreprocessedDatabase,
        parallel: bool,
    },
    Brute(&'a Dataset),
    KdTree(KdTree),
}

impl<'a> Engine<'a> {
    pub fn build(algo: Algo, ds: &'a Dataset, cfg: &BuildConfig) -> Result<Self> {
        Ok(match algo.variant() {
            Some(v) => Engine::Ndkv {
                pre: PreprocessedDatabase::build(ds, &cfg.with_variant(v))?,
                parallel: algo == Algo::NdkvParallel,
            },
            None if algo == Algo::KdTree => Engine::KdTree(KdTree::build(ds)),
            None => Engine::Brute(ds),
        })
    }

    pub fn search(&self, q: &RangeQuery) -> Result<QueryResult> {
        match self {
            Engine::Ndkv {
                pre,
                parallel: true,
            } => pre.search_parallel(q),
            Engine::Ndkv { pre, .. } => pre.search(q),
            Engine::Brute(ds) => brute_force_search(ds, q),
            Engine::KdTree(t) => t.search(q),
        }
    }

    /// Matches plus the number of points tested against the query box.
    pub fn search_counted(&self, q: &RangeQuery) -> Result<(QueryResult, usize)> {
        match self {
            Engine::Ndkv { pre, .. } => {
                let (r, stats): (QueryResult, SearchStats) = pre.search_stats(q)?;
                Ok((r, stats.candidates))
            }
            Engine::Brute(ds) => Ok((brute_force_search(ds, q)?, ds.len())),
            Engine::KdTree(t) => t.search_counted(q),
        }
    }

    /// `(n_db, n_k)` of a k-vector structure; zeros for the baselines.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Engine::Ndkv { pre, .. } => (pre.n_db(), pre.n_k()),
            _ => (0, 0),
        }
    }
}

/// Timing statistics of repeated runs, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Timing {
    pub fn from_samples(samples: &[Duration]) -> Self {
        let secs: Vec<f64> = samples.iter().map(Duration::as_secs_f64).collect();
        Timing {
            mean: secs.iter().sum::<f64>() / secs.len().max(1) as f64,
            min: secs.iter().copied().fold(f64::INFINITY, f64::min),
            max: secs.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Runs `f` once to warm up, then `repeats` timed times.
pub fn time_repeated<T, F: FnMut() -> T>(repeats: usize, mut f: F) -> Timing {
    black_box(f());
    let samples: Vec<Duration> = (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            black_box(f());
            t.elapsed()
        })
        .collect();
    Timing::from_samples(&samples)
}

/// One CSV row: one algorithm at one grid point. Times are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub algo: String,
    pub n: usize,
    pub d: usize,
    pub n_db: usize,
    pub n_k: usize,
    pub fraction: f64,
    pub retrieved: usize,
    pub repeats: usize,
    pub mean_time: f64,
    pub min_time: f64,
    pub max_time: f64,
    pub examined: usize,
    pub preprocess_time: f64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub dims: Vec<usize>,
    pub fractions: Vec<f64>,
    pub algos: Vec<Algo>,
    pub repeats: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub build: BuildConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100_000],
            dims: vec![6],
            fractions: vec![0.05],
            algos: Algo::DEFAULT.to_vec(),
            repeats: 100,
            seed: 42,
            distribution: Distribution::Uniform,
            build: BuildConfig::default(),
        }
    }
}

/// Runs every algorithm over the grid `sizes × dims × fractions`. Each grid
/// point checks all result sets against the linear scan before any timing is
/// recorded; a disagreement aborts the run.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    run_benchmark_with(cfg, |_| {})
}

/// [`run_benchmark`], handing each record to `on_record` as it is produced.
pub fn run_benchmark_with<F: FnMut(&BenchRecord)>(
    cfg: &BenchConfig,
    mut on_record: F,
) -> Result<Vec<BenchRecord>> {
    if let Some(&f) = cfg.fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "fraction {f} outside (0, 1]"
        )));
    }
    let mut records = Vec::new();
    for &n in &cfg.sizes {
        for &d in &cfg.dims {
            let seed = cfg.seed ^ ((n as u64) << 8) ^ d as u64;
            let ds = generate_dataset(n, d, cfg.distribution, seed);
            let mut engines = Vec::with_capacity(cfg.algos.len());
            for &algo in &cfg.algos {
                let t = Instant::now();
                let engine = Engine::build(algo, &ds, &cfg.build)?;
                engines.push((algo, engine, t.elapsed().as_secs_f64()));
            }
            let gen = QueryGenerator::new(&ds);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            for &fraction in &cfg.fractions {
                let q = gen.query(fraction, &mut rng);
                let reference = brute_force_search(&ds, &q)?.sorted();
                for (algo, engine, preprocess_time) in &engines {
                    let (found, examined) = engine.search_counted(&q)?;
                    let found = found.sorted();
                    if found != reference {
                        return Err(Error::ResultMismatch {
                            algo: algo.name().to_string(),
                            expected: reference.len(),
                            found: found.len(),
                            context: format!("n={n} d={d} fraction={fraction} query={q:?}"),
                        });
                    }
                    let timing = time_repeated(cfg.repeats, || engine.search(&q));
                    let (n_db, n_k) = engine.shape();
                    let record = BenchRecord {
                        algo: algo.name().to_string(),
                        n,
                        d,
                        n_db,
                        n_k,
                        fraction,
                        retrieved: reference.len(),
                        repeats: cfg.repeats.max(1),
                        mean_time: timing.mean,
                        min_time: timing.min,
                        max_time: timing.max,
                        examined,
                        preprocess_time: *preprocess_time,
                    };
                    on_record(&record);
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

/// Writes `records` as CSV with a header row.
pub fn write_records<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wtr.write_record(RECORD_HEADER)?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub const RECORD_HEADER: [&str; 13] = [
    "algo",
    "n",
    "d",
    "n_db",
    "n_k",
    "fraction",
    "retrieved",
    "repeats",
    "mean_time",
    "min_time",
    "max_time",
    "examined",
    "preprocess_time",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datasets_are_deterministic_and_in_unit_cube() {
        let a = generate_dataset(1000, 6, Distribution::Uniform, 42);
        assert_eq!(a, generate_dataset(1000, 6, Distribution::Uniform, 42));
        assert_ne!(a, generate_dataset(1000, 6, Distribution::Uniform, 43));
        let small = generate_dataset(10, 3, Distribution::Uniform, 7);
        assert!(small.as_flat().iter().all(|v| (0.0..1.0).contains(v)));
        let c = generate_dataset(1000, 2, Distribution::Clustered, 1);
        assert!(c.as_flat().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn clustered_mass_sits_in_one_cell() {
        let ds = generate_dataset(10_000, 1, Distribution::Clustered, 5);
        let mut v = ds.column(0);
        v.sort_unstable_by(f64::total_cmp);
        // Some window of side 1e-4 holds at least 98% of the points.
        let w = 9_800;
        let tight = (0..v.len() - w).any(|i| v[i + w - 1] - v[i] <= CLUSTER_SIDE);
        assert!(tight);
    }

    #[test]
    fn full_fraction_covers_everything() {
        let ds = generate_dataset(500, 3, Distribution::Uniform, 2);
        let q = generate_query(&ds, 1.0, 9);
        assert_eq!(q, RangeQuery::covering(&ds));
        assert_eq!(brute_force_search(&ds, &q).unwrap().len(), 500);
    }

    #[test]
    fn joint_fraction_near_target() {
        let ds = generate_dataset(100_000, 6, Distribution::Uniform, 42);
        let gen = QueryGenerator::new(&ds);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut total = 0.0;
        for _ in 0..20 {
            let q = gen.query(0.05, &mut rng);
            let got = brute_force_search(&ds, &q).unwrap().len() as f64 / 1e5;
            assert!((0.025..=0.10).contains(&got), "fraction {got}");
            total += got;
        }
        assert!((0.03..0.07).contains(&(total / 20.0)));
    }

    #[test]
    fn tiny_fraction_may_be_empty() {
        let ds = generate_dataset(10_000, 3, Distribution::Uniform, 4);
        let cfg = BenchConfig {
            sizes: vec![10_000],
            dims: vec![3],
            fractions: vec![1e-6],
            repeats: 2,
            ..BenchConfig::default()
        };
        let q = generate_query(&ds, 1e-6, 1);
        assert!(brute_force_search(&ds, &q).unwrap().len() <= 1);
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), Algo::DEFAULT.len());
        assert!(rows.windows(2).all(|w| w[0].retrieved == w[1].retrieved));
    }

    #[test]
    fn records_serialize_with_header() {
        let cfg = BenchConfig {
            sizes: vec![2000],
            dims: vec![1, 2],
            fractions: vec![0.01, 0.5],
            repeats: 3,
            ..BenchConfig::default()
        };
        let rows = run_benchmark(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * Algo::DEFAULT.len());
        for r in &rows {
            assert!(r.min_time <= r.mean_time && r.mean_time <= r.max_time);
            assert_eq!(r.repeats, 3);
        }
        let mut out = Vec::new();
        write_records(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECORD_HEADER.join(","));
        assert_eq!(text.lines().count(), rows.len() + 1);

        let mut out = Vec::new();
        write_records(&[], &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap().trim(),
            RECORD_HEADER.join(",")
        );
    }

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::DEFAULT {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
        }
        assert!("quadtree".parse::<Algo>().is_err());
    }
}
