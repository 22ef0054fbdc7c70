//! The ten-point, three-dimensional example used throughout the docs and
//! tests, and a query over it with a single hit.

use crate::model::{Dataset, RangeQuery};

pub const WORKED_X: [f64; 10] = [6., 9., 0., 2., 4., 3., 5., 1., 8., 7.];
pub const WORKED_Y: [f64; 10] = [9., 3., 2., 7., 1., 0., 6., 8., 4., 5.];
pub const WORKED_Z: [f64; 10] = [1., 9., 5., 3., 4., 0., 2., 8., 6., 7.];

/// Ten points `(x, y, z)` with ids 0..10.
pub fn worked_example_dataset() -> Dataset {
    Dataset::from_columns(&[WORKED_X, WORKED_Y, WORKED_Z]).expect("well-formed fixture")
}

/// `[2, 8] × [5, 6] × [1, 3]`; matches only id 6, the point `(5, 6, 2)`.
pub fn worked_example_query() -> RangeQuery {
    RangeQuery::new(vec![(2.0, 8.0), (5.0, 6.0), (1.0, 3.0)])
}
