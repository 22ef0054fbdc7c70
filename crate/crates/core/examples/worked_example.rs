// Builds the ten-point example with two sub-databases and five-entry
// k-vectors, prints every auxiliary array, and runs the single-hit query.

use ndkv::fixtures::{worked_example_dataset, worked_example_query};
use ndkv::search::estimate_counts;
use ndkv::{BuildConfig, PreprocessedDatabase};

fn main() {
    let ds = worked_example_dataset();
    let pre = PreprocessedDatabase::build(&ds, &BuildConfig::new(2, 5)).expect("valid input");
    let sdb = pre.structure();
    let names = ["x", "y", "z"];

    for s in 0..pre.n_db() {
        let range = sdb.subdb_range(s);
        println!("sub-database {s} (structured rows {range:?})");
        println!("  id  {:?}", &sdb.perm()[range.clone()]);
        for (j, name) in names.iter().enumerate() {
            let col: Vec<f64> = range.clone().map(|i| sdb.coord(i, j)).collect();
            println!("  {name}   {col:?}");
        }
        let index = pre.index().expect("full variant");
        for (j, name) in names.iter().enumerate().skip(1) {
            println!("  index[{name}] {:?}", index.slice(j, range.clone()));
        }
        let kv = pre.kvectors().expect("full variant");
        for (j, name) in names.iter().enumerate() {
            let line = kv.line(s, j);
            println!(
                "  line[{name}] m={:.2} q={:.2}  k={:?}",
                line.m,
                line.q,
                kv.kvec(s, j)
            );
        }
    }

    let q = worked_example_query();
    for s in 0..pre.n_db() {
        let c = estimate_counts(&pre, s, &q).expect("full variant");
        println!(
            "sub-database {s}: window counts {:?}, order {:?}",
            c.p, c.order
        );
    }
    let (hits, stats) = pre.search_stats(&q).expect("valid query");
    println!("query {:?}", q.bounds());
    println!("  hits {:?}", hits.ids);
    println!("  skipped sub-databases {:?}", stats.skipped_subdbs);
    println!(
        "  (sub-database, projection dimension, candidates) {:?}",
        stats.projections
    );
    assert_eq!(hits.ids, vec![6]);
}
