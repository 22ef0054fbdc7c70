// Builds all four storage variants of one dataset, compares what they store
// and checks that they answer identically.

use std::time::Instant;

use ndkv::bench::{generate_dataset, Distribution, QueryGenerator};
use ndkv::{BuildConfig, PreprocessedDatabase, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let (n, d) = (50_000, 4);
    let ds = generate_dataset(n, d, Distribution::Uniform, 3);
    let gen = QueryGenerator::new(&ds);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let queries: Vec<_> = (0..200).map(|_| gen.query(0.01, &mut rng)).collect();

    let mut reference = None;
    println!(
        "{:<14} {:>10} {:>10} {:>8} {:>12}",
        "variant", "index", "k-vector", "lines", "µs/query"
    );
    for v in Variant::ALL {
        let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default().with_variant(v))
            .expect("valid input");
        let (index, k, lines, _) = pre.auxiliary_counts();
        let t = Instant::now();
        let answers: Vec<_> = queries
            .iter()
            .map(|q| pre.search(q).expect("valid query").sorted())
            .collect();
        let per_query = t.elapsed().as_secs_f64() * 1e6 / queries.len() as f64;
        println!(
            "{:<14} {index:>10} {k:>10} {lines:>8} {per_query:>12.1}",
            v.name()
        );
        match &reference {
            None => reference = Some(answers),
            Some(r) => assert_eq!(r, &answers, "{v} disagrees"),
        }
    }
}
