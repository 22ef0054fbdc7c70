// A built structure is immutable, so any number of threads can query it at
// once; a single query can also fan out over sub-databases.

use std::sync::Arc;
use std::thread;

use ndkv::bench::{generate_dataset, Distribution, QueryGenerator};
use ndkv::{BuildConfig, PreprocessedDatabase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let ds = generate_dataset(100_000, 3, Distribution::Uniform, 1);
    let pre =
        Arc::new(PreprocessedDatabase::build(&ds, &BuildConfig::default()).expect("valid input"));
    let gen = Arc::new(QueryGenerator::new(&ds));

    let handles: Vec<_> = (0..4u64)
        .map(|t| {
            let pre = Arc::clone(&pre);
            let gen = Arc::clone(&gen);
            thread::spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(t);
                (0..250)
                    .map(|_| {
                        let q = gen.query(0.001, &mut rng);
                        let serial = pre.search(&q).expect("valid query").sorted();
                        let parallel = pre.search_parallel(&q).expect("valid query").sorted();
                        assert_eq!(serial, parallel);
                        serial.len()
                    })
                    .sum::<usize>()
            })
        })
        .collect();
    for (t, h) in handles.into_iter().enumerate() {
        println!(
            "thread {t}: {} hits over 250 queries",
            h.join().expect("no panic")
        );
    }
}
