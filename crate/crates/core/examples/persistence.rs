// CSV in, structure file out, and back: the loaded structure is identical
// to the one that was saved and answers the same queries.

use ndkv::bench::{generate_dataset, generate_query, Distribution};
use ndkv::io::{load_csv, load_structure, save_structure, write_csv};
use ndkv::{BuildConfig, PreprocessedDatabase, Variant};

fn main() {
    let dir = std::env::temp_dir().join(format!("ndkv-persistence-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");

    let csv = dir.join("points.csv");
    write_csv(&generate_dataset(10_000, 3, Distribution::Uniform, 9), &csv).expect("write csv");
    let ds = load_csv(&csv).expect("read csv");
    let q = generate_query(&ds, 0.01, 4);

    for v in Variant::ALL {
        let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default().with_variant(v))
            .expect("valid input");
        let path = dir.join(format!("{}.ndkv", v.name()));
        save_structure(&pre, &path).expect("save");
        let loaded = load_structure(&path).expect("load");
        assert_eq!(loaded, pre);
        let bytes = std::fs::metadata(&path).expect("stat").len();
        let hits = loaded.search(&q).expect("valid query");
        println!("{:<14} {bytes:>9} bytes, {} hits", v.name(), hits.len());
    }
    std::fs::remove_dir_all(&dir).ok();
}
