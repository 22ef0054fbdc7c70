//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line before asserting. Checks hold a shared lock so timing-based ones
//! never compete with the others for cores.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use ndkv::bench::{generate_dataset, Distribution, QueryGenerator};
use ndkv::fixtures::{worked_example_dataset, worked_example_query};
use ndkv::io::{read_structure, write_structure};
use ndkv::reduced::{search_no_index, search_no_kvector};
use ndkv::search::TrimPolicy;
use ndkv::{
    brute_force_search, BuildConfig, Dataset, KVector1D, KdTree, PreprocessedDatabase, QueryResult,
    RangeQuery, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static TIMING: Mutex<()> = Mutex::new(());

fn timing_lock() -> std::sync::MutexGuard<'static, ()> {
    TIMING.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, pass: bool, detail: &str) {
    println!(
        "criterion {id}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn queries(ds: &Dataset, fraction: f64, count: usize, seed: u64) -> Vec<RangeQuery> {
    let gen = QueryGenerator::new(ds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gen.query(fraction, &mut rng)).collect()
}

/// Smallest of `trials` total times for running `f` over every query.
fn best_total<T>(
    trials: usize,
    qs: &[RangeQuery],
    mut f: impl FnMut(&RangeQuery) -> T,
) -> Duration {
    for q in qs {
        std::hint::black_box(f(q));
    }
    (0..trials)
        .map(|_| {
            let t = Instant::now();
            for q in qs {
                std::hint::black_box(f(q));
            }
            t.elapsed()
        })
        .min()
        .unwrap()
}

fn best_of<T>(trials: usize, mut f: impl FnMut() -> T) -> Duration {
    (0..trials)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn criterion_01_worked_example_tables() {
    let _guard = timing_lock();
    let pre =
        PreprocessedDatabase::build(&worked_example_dataset(), &BuildConfig::new(2, 5)).unwrap();
    let sdb = pre.structure();
    let mut mismatches = Vec::new();
    let mut check = |what: String, ok: bool| {
        if !ok {
            mismatches.push(what);
        }
    };

    // Sub-database tables, by structured index.
    let rows: [[f64; 10]; 3] = [
        [2., 3., 4., 5., 6., 0., 1., 7., 8., 9.],
        [7., 0., 1., 6., 9., 2., 8., 5., 4., 3.],
        [3., 0., 4., 2., 1., 5., 8., 7., 6., 9.],
    ];
    for (j, row) in rows.iter().enumerate() {
        let got: Vec<f64> = (0..10).map(|i| sdb.coord(i, j)).collect();
        check(format!("sub-database row {j}: {got:?}"), got == row);
    }
    check(
        format!("perm {:?}", sdb.perm()),
        sdb.perm() == [3, 5, 4, 6, 0, 2, 7, 9, 8, 1],
    );

    let index = pre.index().unwrap();
    let expected_index: [[[usize; 5]; 2]; 2] = [
        [[1, 2, 3, 0, 4], [5, 9, 8, 7, 6]],
        [[1, 4, 3, 0, 2], [5, 8, 7, 6, 9]],
    ];
    for (j, per_db) in expected_index.iter().enumerate() {
        for (s, want) in per_db.iter().enumerate() {
            let got = index.slice(j + 1, sdb.subdb_range(s));
            check(
                format!("index dim {} sub-db {s}: {got:?}", j + 1),
                got == want,
            );
        }
    }

    let kv = pre.kvectors().unwrap();
    let lines = [
        [(1.00, -2.00), (0.44, 0.00), (1.00, 0.00)],
        [(0.44, 0.00), (0.67, -1.33), (1.00, -5.00)],
    ];
    let kvecs: [[[usize; 5]; 3]; 2] = [
        [[0, 1, 2, 4, 5], [0, 2, 2, 3, 5], [0, 1, 2, 4, 5]],
        [[5, 7, 7, 7, 10], [5, 7, 8, 9, 10], [5, 6, 7, 9, 10]],
    ];
    let round2 = |x: f64| (x * 100.0).round() / 100.0 + 0.0;
    for s in 0..2 {
        for j in 0..3 {
            let line = kv.line(s, j);
            let (m, q) = lines[s][j];
            check(
                format!("line ({s}, {j}): m={} q={}", line.m, line.q),
                round2(line.m) == m && round2(line.q) == q,
            );
            let got = kv.kvec(s, j);
            check(format!("k ({s}, {j}): {got:?}"), got == kvecs[s][j]);
        }
    }
    report(
        1,
        mismatches.is_empty(),
        &if mismatches.is_empty() {
            "structure, index arrays, 6 lines and all 30 k-vector entries match exactly".into()
        } else {
            mismatches.join("; ")
        },
    );
}

#[test]
fn criterion_02_worked_example_query() {
    let _guard = timing_lock();
    let ds = worked_example_dataset();
    let q = worked_example_query();
    let full = PreprocessedDatabase::build(&ds, &BuildConfig::new(2, 5)).unwrap();
    let no_index =
        PreprocessedDatabase::build(&ds, &BuildConfig::new(2, 5).with_variant(Variant::NoIndex))
            .unwrap();
    let no_kv = PreprocessedDatabase::build(
        &ds,
        &BuildConfig::new(2, 5).with_variant(Variant::NoKVectorNoIndex),
    )
    .unwrap();

    let (hits, stats) = full.search_stats(&q).unwrap();
    let answers = [
        ("range-search", hits.sorted().ids),
        (
            "no-index",
            search_no_index(&no_index, &q).unwrap().sorted().ids,
        ),
        (
            "no-kvector",
            search_no_kvector(&no_kv, &q).unwrap().sorted().ids,
        ),
        (
            "no-kvector on full",
            search_no_kvector(&full, &q).unwrap().sorted().ids,
        ),
        ("brute force", brute_force_search(&ds, &q).unwrap().ids),
        (
            "k-d tree",
            KdTree::build(&ds).search(&q).unwrap().sorted().ids,
        ),
    ];
    let all_six = answers.iter().all(|(_, ids)| ids == &[6]);
    let point_ok = ds.point(6) == [5.0, 6.0, 2.0];
    let skipped = stats.skipped_subdbs == [1];
    report(
        2,
        all_six && point_ok && skipped,
        &format!(
            "answers {answers:?}; skipped sub-databases {:?}",
            stats.skipped_subdbs
        ),
    );
}

/// Datasets mixing continuous values, heavy duplication and constant columns.
fn oracle_dataset(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let style = rng.gen_range(0..3);
    let coords = (0..n * d)
        .map(|i| match style {
            0 => rng.gen::<f64>(),
            1 => f64::from(rng.gen_range(0..5)),
            _ if i % d == 0 => 1.5,
            _ => f64::from(rng.gen_range(-3..3)) * 0.25,
        })
        .collect();
    Dataset::from_flat(d, coords).unwrap()
}

/// Queries with bounds drawn from the data itself (so they coincide with
/// stored values), from random reals, or degenerate to a point.
fn oracle_query(ds: &Dataset, rng: &mut ChaCha8Rng) -> RangeQuery {
    let bounds = (0..ds.dims())
        .map(|j| {
            let pick = |rng: &mut ChaCha8Rng| ds.coord(rng.gen_range(0..ds.len()), j);
            let (a, b) = match rng.gen_range(0..4) {
                0 => (pick(rng), pick(rng)),
                1 => (rng.gen_range(-1.0..5.0), rng.gen_range(-1.0..5.0)),
                2 => {
                    let v = pick(rng);
                    (v, v)
                }
                _ => (pick(rng), rng.gen_range(-1.0..5.0)),
            };
            (a.min(b), a.max(b))
        })
        .collect();
    RangeQuery::new(bounds)
}

#[test]
fn criterion_03_oracle_equivalence() {
    let _guard = timing_lock();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = 0;
    let mut failures = Vec::new();
    for n in [1, 2, 10, 1_000, 10_000] {
        for d in [1, 2, 3, 6, 10] {
            for _ in 0..2 {
                let ds = oracle_dataset(n, d, &mut rng);
                let n_db = if rng.gen_bool(0.5) {
                    None
                } else {
                    Some(rng.gen_range(1..=n))
                };
                let n_k = if rng.gen_bool(0.5) {
                    None
                } else {
                    Some(rng.gen_range(2..40))
                };
                let structures: Vec<_> = Variant::ALL
                    .iter()
                    .map(|&variant| {
                        let cfg = BuildConfig { n_db, n_k, variant };
                        PreprocessedDatabase::build(&ds, &cfg).unwrap()
                    })
                    .collect();
                let tree = KdTree::build(&ds);
                for _ in 0..25 {
                    let q = oracle_query(&ds, &mut rng);
                    let truth = brute_force_search(&ds, &q).unwrap();
                    let mut answers: Vec<(String, QueryResult)> = structures
                        .iter()
                        .map(|p| (p.variant().name().to_string(), p.search(&q).unwrap()))
                        .collect();
                    answers.push(("kdtree".into(), tree.search(&q).unwrap()));
                    for (name, got) in answers {
                        if !got.same_set(&truth) {
                            failures.push(format!("{name} n={n} d={d} {q:?}"));
                        }
                    }
                    pairs += 1;
                }
            }
        }
    }
    report(
        3,
        pairs >= 1000 && failures.is_empty(),
        &format!(
            "{pairs} dataset/query pairs, {} mismatches {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_04_candidate_bound() {
    let _guard = timing_lock();
    let n = 100_000;
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for d in [2, 6] {
        let ds = generate_dataset(n, d, Distribution::Uniform, 40 + d as u64);
        let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default()).unwrap();
        for f in [1e-4, 1e-3, 1e-2, 1e-1] {
            // Averaged over queries: individual queries scatter around the
            // target fraction, and the bound is about the expected work.
            let qs = queries(&ds, f, 50, d as u64);
            let (mut k, mut candidates) = (0usize, 0usize);
            for q in &qs {
                let (r, stats) = pre.search_stats(q).unwrap();
                k += r.len();
                candidates += stats.candidates;
            }
            let mean_k = k as f64 / qs.len() as f64;
            let mean_c = candidates as f64 / qs.len() as f64;
            let bound = 4.0 * n as f64 * (mean_k / n as f64).powf(2.0 / d as f64);
            worst = worst.max(mean_c / bound);
            lines.push(format!(
                "d={d} f={f}: k={mean_k:.1} candidates={mean_c:.1} bound={bound:.1}"
            ));
        }
    }
    report(
        4,
        worst <= 1.0,
        &format!("worst candidates/bound = {worst:.3}; {}", lines.join("; ")),
    );
}

#[test]
fn criterion_05_one_dimensional_extraneous() {
    let _guard = timing_lock();
    let n = 100_000;
    let n_k = 10_000;
    let values = generate_dataset(n, 1, Distribution::Uniform, 5).column(0);
    let kv = KVector1D::build(&values, n_k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let queries = 10_000;
    let mut extraneous = 0usize;
    for _ in 0..queries {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen_range(a..1.0);
        extraneous += kv.search_detailed(a, b, TrimPolicy::Linear).extraneous();
    }
    let per_query = extraneous as f64 / queries as f64;
    let per_boundary = per_query / 2.0;
    // Band [5, 20] per boundary. A boundary falls uniformly inside a cell
    // of n / n_k = 10 elements, so its own expectation is about 5: the lower
    // edge of the band sits on the mean and the outcome is a coin flip.
    report(
        5,
        (5.0..=20.0).contains(&per_boundary),
        &format!(
            "mean extraneous per boundary {per_boundary:.3} (band 5..=20), per query {per_query:.3} (n/n_k = {})",
            n / n_k
        ),
    );
}

#[test]
fn criterion_06_one_dimensional_adversarial() {
    let _guard = timing_lock();
    let n = 100_001;
    let mut values: Vec<f64> = (0..n - 1).map(|i| i as f64 * 1e-9).collect();
    values.push(1.0);
    let kv = KVector1D::build(&values, n / 10).unwrap();
    let log2n = (n as f64).log2().ceil() as usize;
    let limit = 2 * log2n + 4;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_auto, mut linear_total, mut binary_engaged) = (0, 0usize, true);
    let queries = 200;
    let top = (n - 2) as f64 * 1e-9;
    for _ in 0..queries {
        let a = rng.gen_range(0.0..top);
        let b = rng.gen_range(a..top);
        let auto = kv.search_detailed(a, b, TrimPolicy::default());
        let linear = kv.search_detailed(a, b, TrimPolicy::Linear);
        assert_eq!(auto.exact, linear.exact);
        binary_engaged &= auto.lower_mode == ndkv::search::TrimMode::Binary;
        worst_auto = worst_auto.max(auto.comparisons);
        linear_total += linear.comparisons;
    }
    let linear_mean = linear_total as f64 / queries as f64;
    report(
        6,
        binary_engaged && worst_auto <= limit && linear_mean >= n as f64 / 4.0,
        &format!(
            "binary mode engaged: {binary_engaged}; worst auto comparisons {worst_auto} (limit {limit}); mean forced-linear {linear_mean:.0}"
        ),
    );
}

#[test]
fn criterion_07_relative_speed() {
    let _guard = timing_lock();
    let n = 100_000;

    let ds = generate_dataset(n, 6, Distribution::Uniform, 71);
    let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default()).unwrap();
    let qs = queries(&ds, 0.05, 50, 7);
    let examined: usize = qs
        .iter()
        .map(|q| pre.search_stats(q).unwrap().1.candidates)
        .sum();
    let mean_examined = examined as f64 / qs.len() as f64;
    let t_ndkv = best_total(5, &qs, |q| pre.search(q).unwrap());
    let t_brute = best_total(5, &qs, |q| brute_force_search(&ds, q).unwrap());

    let ds2 = generate_dataset(n, 2, Distribution::Uniform, 72);
    let pre2 = PreprocessedDatabase::build(&ds2, &BuildConfig::default()).unwrap();
    let tree2 = KdTree::build(&ds2);
    let qs2 = queries(&ds2, 1e-4, 500, 8);
    let t_ndkv2 = best_total(7, &qs2, |q| pre2.search(q).unwrap());
    let t_tree2 = best_total(7, &qs2, |q| tree2.search(q).unwrap());

    let ok = t_ndkv < t_brute
        && mean_examined < n as f64
        && t_ndkv2.as_secs_f64() <= 1.5 * t_tree2.as_secs_f64();
    report(
        7,
        ok,
        &format!(
            "d=6 f=0.05: ndkv {:.1}µs vs brute {:.1}µs per query, examined {mean_examined:.0} of {n}; d=2 f=1e-4: ndkv/kd-tree = {:.2}",
            t_ndkv.as_secs_f64() * 1e6 / qs.len() as f64,
            t_brute.as_secs_f64() * 1e6 / qs.len() as f64,
            t_ndkv2.as_secs_f64() / t_tree2.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_variant_degradation() {
    let _guard = timing_lock();
    let n = 100_000;
    let mut ratios = Vec::new();
    let mut full_first = true;
    for d in [2, 6, 10] {
        let ds = generate_dataset(n, d, Distribution::Uniform, 80 + d as u64);
        let full = PreprocessedDatabase::build(&ds, &BuildConfig::default()).unwrap();
        let bare = PreprocessedDatabase::build(
            &ds,
            &BuildConfig::default().with_variant(Variant::NoKVectorNoIndex),
        )
        .unwrap();
        let qs = queries(&ds, 0.01, 100, d as u64);
        let t_full = best_total(7, &qs, |q| full.search(q).unwrap());
        let t_bare = best_total(7, &qs, |q| bare.search(q).unwrap());
        let ratio = t_bare.as_secs_f64() / t_full.as_secs_f64();
        if d == 2 {
            full_first = t_full <= t_bare;
        }
        ratios.push((d, ratio));
    }
    let shrinking = ratios[2].1 < ratios[0].1;
    report(
        8,
        full_first && shrinking,
        &format!("no-auxiliary/full time ratio by d: {ratios:.2?}"),
    );
}

#[test]
fn criterion_09_preprocessing_scaling() {
    let _guard = timing_lock();
    let d = 6;
    let small = generate_dataset(100_000, d, Distribution::Uniform, 91);
    let large = generate_dataset(1_000_000, d, Distribution::Uniform, 92);
    let cfg = BuildConfig::default();
    let t_small = best_of(5, || PreprocessedDatabase::build(&small, &cfg).unwrap());
    let t_large = best_of(3, || PreprocessedDatabase::build(&large, &cfg).unwrap());
    let growth = t_large.as_secs_f64() / t_small.as_secs_f64();

    let mut vs_tree = Vec::new();
    for d in 1..=5 {
        let ds = generate_dataset(200_000, d, Distribution::Uniform, 93 + d as u64);
        let t_ndkv = best_of(3, || PreprocessedDatabase::build(&ds, &cfg).unwrap());
        let t_tree = best_of(3, || KdTree::build(&ds));
        vs_tree.push((d, t_ndkv.as_secs_f64() / t_tree.as_secs_f64()));
    }
    let ok = growth <= 13.0 && vs_tree.iter().all(|&(_, r)| r <= 1.5);
    report(
        9,
        ok,
        &format!("build 10⁶/10⁵ ratio {growth:.2}; ndkv/kd-tree build ratio by d {vs_tree:.2?}"),
    );
}

#[test]
fn criterion_10_persistence() {
    let _guard = timing_lock();
    let mut failures = Vec::new();
    let mut checked = 0;
    for d in [1, 6] {
        let ds = generate_dataset(10_000, d, Distribution::Uniform, 100 + d as u64);
        for v in Variant::ALL {
            let pre =
                PreprocessedDatabase::build(&ds, &BuildConfig::default().with_variant(v)).unwrap();
            let mut bytes = Vec::new();
            write_structure(&pre, &mut bytes).unwrap();
            let back = read_structure(bytes.as_slice()).unwrap();
            let mut again = Vec::new();
            write_structure(&back, &mut again).unwrap();
            if back != pre || again != bytes {
                failures.push(format!("d={d} {v}"));
            }
            checked += 1;
        }
    }
    report(
        10,
        failures.is_empty(),
        &format!("{checked} structures round-tripped, failures {failures:?}"),
    );
}
