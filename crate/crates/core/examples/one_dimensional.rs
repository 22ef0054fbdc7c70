// The one-dimensional k-vector on well-behaved and on adversarial data:
// trimming stays cheap because crowded cells switch to binary search.

use ndkv::bench::{generate_dataset, Distribution};
use ndkv::search::TrimPolicy;
use ndkv::KVector1D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(label: &str, values: &[f64], n_k: usize) {
    let kv = KVector1D::build(values, n_k).expect("finite values");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (lo, hi) = (kv.sorted_values()[0], kv.sorted_values()[kv.len() - 1]);
    let queries = 2_000;
    let (mut auto, mut linear, mut extraneous) = (0, 0, 0);
    for _ in 0..queries {
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(a..=hi);
        let t = kv.search_detailed(a, b, TrimPolicy::default());
        let l = kv.search_detailed(a, b, TrimPolicy::Linear);
        assert_eq!(t.exact, l.exact);
        auto += t.comparisons;
        linear += l.comparisons;
        extraneous += t.extraneous();
    }
    let q = queries as f64;
    println!(
        "{label:<10} n={:<7} n_k={:<6} extraneous/query={:6.2}  comparisons/query auto={:8.1} linear={:8.1}",
        kv.len(),
        n_k,
        extraneous as f64 / q,
        auto as f64 / q,
        linear as f64 / q
    );
}

fn main() {
    let n = 100_000;
    let uniform = generate_dataset(n, 1, Distribution::Uniform, 7).column(0);
    report("uniform", &uniform, n / 10);
    let clustered = generate_dataset(n, 1, Distribution::Clustered, 7).column(0);
    report("clustered", &clustered, n / 10);

    let kv = KVector1D::build(&[0.5, 0.1, 0.9, 0.3, 0.7], 5).expect("finite values");
    println!("positions of [0.2, 0.8]: {:?}", kv.ids(0.2, 0.8));
}
