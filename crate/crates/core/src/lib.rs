//! Static orthogonal range search with the n-dimensional k-vector.
//!
//! A [`PreprocessedDatabase`] is built once from a [`Dataset`]; every box
//! query afterwards locates per-dimension candidate windows in near-constant
//! time, projects on the cheapest dimension and verifies the rest.
//!
//! ```
//! use ndkv::{BuildConfig, Dataset, PreprocessedDatabase, RangeQuery};
//!
//! let ds = Dataset::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])?;
//! let pre = PreprocessedDatabase::build(&ds, &BuildConfig::default())?;
//! let hits = pre.search(&RangeQuery::new(vec![(1.0, 4.0), (0.0, 4.0)]))?;
//! assert_eq!(hits.ids, vec![1]);
//! # Ok::<(), ndkv::Error>(())
//! ```

pub mod baseline;
pub mod bench;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kvector1d;
pub mod line;
pub mod model;
pub mod reduced;
pub mod search;
pub mod structure;

#[cfg(test)]
pub(crate) mod testutil;

pub use baseline::{brute_force_search, KdTree};
pub use error::{Error, Result};
pub use kvector1d::KVector1D;
pub use line::LineParams;
pub use model::{validate_query, Dataset, QueryResult, RangeQuery};
pub use search::{search, SearchObserver, SearchOptions, SearchStats, TrimPolicy};
pub use structure::{preprocess, BuildConfig, PreprocessedDatabase, Variant};
