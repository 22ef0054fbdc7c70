use crate::bench::{generate_dataset, generate_query, Distribution};
use crate::fixtures::{worked_example_dataset, worked_example_query};
use crate::model::{Dataset, RangeQuery};

pub fn table1() -> Dataset {
    worked_example_dataset()
}

pub fn table1_query() -> RangeQuery {
    worked_example_query()
}

pub fn uniform_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    generate_dataset(n, d, Distribution::Uniform, seed)
}

pub fn uniform_query(ds: &Dataset, fraction: f64, seed: u64) -> RangeQuery {
    generate_query(ds, fraction, seed)
}
