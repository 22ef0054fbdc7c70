// A small dimension sweep through the benchmark harness, printed as CSV.
// `ndkv bench` runs the same thing with a configurable grid.

use ndkv::bench::{run_benchmark, write_records, BenchConfig};

fn main() {
    let cfg = BenchConfig {
        sizes: vec![20_000],
        dims: vec![1, 2, 4, 8],
        fractions: vec![0.01],
        repeats: 10,
        ..BenchConfig::default()
    };
    let records = run_benchmark(&cfg).expect("all algorithms agree");
    write_records(&records, std::io::stdout().lock()).expect("stdout");
}
