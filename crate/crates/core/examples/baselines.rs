// Compares the k-vector search with a linear scan and a k-d tree on the same
// queries, counting how many points each one has to test.

use std::time::Instant;

use ndkv::bench::{generate_dataset, time_repeated, Distribution, QueryGenerator};
use ndkv::{brute_force_search, BuildConfig, KdTree, PreprocessedDatabase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 100_000;
    for d in [2, 6] {
        let ds = generate_dataset(n, d, Distribution::Uniform, 5);
        let t = Instant::now();
        let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default()).expect("valid input");
        let ndkv_build = t.elapsed();
        let t = Instant::now();
        let tree = KdTree::build(&ds);
        let tree_build = t.elapsed();
        println!("d={d}: build ndkv {ndkv_build:.2?}, kd-tree {tree_build:.2?}");

        let gen = QueryGenerator::new(&ds);
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        for f in [1e-4, 1e-2] {
            let q = gen.query(f, &mut rng);
            let truth = brute_force_search(&ds, &q).expect("valid query").sorted();
            let (hits, stats) = pre.search_stats(&q).expect("valid query");
            let (tree_hits, tree_examined) = tree.search_counted(&q).expect("valid query");
            assert_eq!(hits.sorted(), truth);
            assert_eq!(tree_hits.sorted(), truth);

            let brute = time_repeated(20, || brute_force_search(&ds, &q));
            let kv = time_repeated(20, || pre.search(&q));
            let kd = time_repeated(20, || tree.search(&q));
            println!(
                "  f={f:<6} k={:<6} mean µs: brute {:8.1} ndkv {:8.1} kd-tree {:8.1}  examined: ndkv {} kd-tree {}",
                truth.len(),
                brute.mean * 1e6,
                kv.mean * 1e6,
                kd.mean * 1e6,
                stats.candidates,
                tree_examined
            );
        }
    }
}
