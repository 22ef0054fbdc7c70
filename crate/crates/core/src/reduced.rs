//! Searches over structures built without some auxiliary arrays.
//!
//! Without index arrays the projection is fixed to dimension 0, and the
//! candidate sub-databases are found by binary search over their
//! last-dimension minima. Without k-vectors every window comes from two
//! binary searches over the sorted view instead; the counts are then exact.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::line::map_range;
use crate::model::{QueryResult, RangeQuery};
use crate::search::{
    cell_occupancy, end_candidate_subdb, first_candidate_subdb, last_dim_covered,
    select_projection_dimension, trim_extremes, verify_into, DimCounts, KWindow, SearchObserver,
    SearchOptions,
};
use crate::structure::PreprocessedDatabase;

/// Sub-databases whose last-dimension span can intersect `[a, b]`.
pub fn candidate_subdbs(pre: &PreprocessedDatabase, q: &RangeQuery) -> Range<usize> {
    let last = pre.dims() - 1;
    let first = first_candidate_subdb(&pre.minima, q.lower(last));
    let end = end_candidate_subdb(&pre.minima, q.upper(last));
    first..end.max(first)
}

/// Dimension-0 k-vector search; ignores index arrays even when present.
pub fn search_no_index(pre: &PreprocessedDatabase, q: &RangeQuery) -> Result<QueryResult> {
    q.validate(pre.dims())?;
    if pre.kvectors.is_none() {
        return Err(Error::MissingAuxiliary("k-vector arrays"));
    }
    Ok(QueryResult::new(no_index_search(
        pre,
        q,
        &SearchOptions::default(),
        &mut (),
    )))
}

/// Binary-search windows; uses index arrays for dimension selection when the
/// structure has them, and projects on dimension 0 otherwise.
pub fn search_no_kvector(pre: &PreprocessedDatabase, q: &RangeQuery) -> Result<QueryResult> {
    q.validate(pre.dims())?;
    Ok(QueryResult::new(no_kvector_search(
        pre,
        q,
        &SearchOptions::default(),
        &mut (),
    )))
}

pub(crate) fn no_index_search<O: SearchObserver>(
    pre: &PreprocessedDatabase,
    q: &RangeQuery,
    opts: &SearchOptions,
    obs: &mut O,
) -> Vec<usize> {
    let sdb = &pre.structure;
    let kv = pre.kvectors.as_ref().expect("k-vectors present");
    let d = sdb.dims();
    let (a, b) = (q.lower(0), q.upper(0));
    let mut checks = Vec::with_capacity(d);
    let mut out = Vec::new();

    for s in candidate_subdbs(pre, q) {
        let range = sdb.subdb_range(s);
        let k = kv.kvec(s, 0);
        let window = KWindow::from_bounds(k, map_range(kv.line(s, 0), a, b, kv.n_k()));
        if window.count() == 0 {
            obs.skipped(s);
            continue;
        }
        let expected = cell_occupancy(range.len(), kv.n_k());
        let t = trim_extremes(|i| sdb.coord(i, 0), &window, a, b, opts.trim, expected);
        obs.trimmed(&t);
        obs.projected(s, 0, t.exact.len());

        let skip_last = last_dim_covered(pre, s, q);
        checks.clear();
        checks.extend((1..d).filter(|&j| !(skip_last && j == d - 1)));
        verify_into(sdb, q, t.exact, &checks, &mut out);
    }
    out
}

/// Exact sorted-position range of `[a, b]` in dimension `j` of one
/// sub-database, by two binary searches.
fn exact_window(
    pre: &PreprocessedDatabase,
    range: &Range<usize>,
    j: usize,
    a: f64,
    b: f64,
) -> Range<usize> {
    let sdb = &pre.structure;
    if j == 0 {
        let lo = partition(range.clone(), |i| sdb.coord(i, 0) < a);
        let hi = partition(lo..range.end, |i| sdb.coord(i, 0) <= b);
        lo..hi
    } else {
        let map = pre
            .index
            .as_ref()
            .expect("index present")
            .slice(j, range.clone());
        let lo = partition(0..map.len(), |i| sdb.coord(map[i], j) < a);
        let hi = partition(lo..map.len(), |i| sdb.coord(map[i], j) <= b);
        range.start + lo..range.start + hi
    }
}

#[inline]
fn partition<P: Fn(usize) -> bool>(range: Range<usize>, pred: P) -> usize {
    let (mut lo, mut hi) = (range.start, range.end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn no_kvector_search<O: SearchObserver>(
    pre: &PreprocessedDatabase,
    q: &RangeQuery,
    opts: &SearchOptions,
    obs: &mut O,
) -> Vec<usize> {
    let sdb = &pre.structure;
    let d = sdb.dims();
    let last = d - 1;
    let mut windows: Vec<Range<usize>> = vec![0..0; d];
    let mut checks = Vec::with_capacity(d);
    let mut out = Vec::new();

    'subdbs: for s in candidate_subdbs(pre, q) {
        let range = sdb.subdb_range(s);
        let skip_last = last_dim_covered(pre, s, q);

        let dim = match &pre.index {
            Some(_) => {
                // Last dimension first: it is the one most likely to be empty.
                for j in (0..d).rev() {
                    windows[j] = exact_window(pre, &range, j, q.lower(j), q.upper(j));
                    if windows[j].is_empty() {
                        obs.skipped(s);
                        continue 'subdbs;
                    }
                }
                let counts = DimCounts::from_counts(windows.iter().map(|w| w.len()).collect());
                let dim = select_projection_dimension(&counts, range.len(), &opts.access);
                checks.clear();
                checks.extend(
                    counts
                        .order
                        .iter()
                        .copied()
                        .filter(|&j| j != dim && !(skip_last && j == last)),
                );
                dim
            }
            None => {
                windows[0] = exact_window(pre, &range, 0, q.lower(0), q.upper(0));
                if windows[0].is_empty() {
                    obs.skipped(s);
                    continue;
                }
                checks.clear();
                checks.extend((1..d).filter(|&j| !(skip_last && j == last)));
                0
            }
        };

        let w = windows[dim].clone();
        obs.projected(s, dim, w.len());
        if dim == 0 {
            verify_into(sdb, q, w, &checks, &mut out);
        } else {
            let map = pre
                .index
                .as_ref()
                .expect("index present")
                .slice(dim, range.clone());
            let local = w.start - range.start..w.end - range.start;
            verify_into(sdb, q, map[local].iter().copied(), &checks, &mut out);
        }
    }
    out
}
