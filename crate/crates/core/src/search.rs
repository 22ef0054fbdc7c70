//! The query pipeline over a [`PreprocessedDatabase`] with full auxiliary
//! arrays.
//!
//! Per sub-database: map every interval onto its k-vector, read the window
//! counts `p`, skip the sub-database if any count is zero, pick a projection
//! dimension, trim that dimension's window to the exact rank bounds, and
//! verify the remaining dimensions point by point in ascending-`p` order.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::line::{map_range, WindowBounds};
use crate::model::{QueryResult, RangeQuery};
use crate::structure::{PreprocessedDatabase, StructuredDatabase};

/// How the two boundary cells of a window are trimmed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrimPolicy {
    /// Per boundary: linear when the cell holds at most `threshold` times the
    /// expected count, binary otherwise.
    Auto {
        threshold: f64,
    },
    Linear,
    Binary,
}

impl Default for TrimPolicy {
    fn default() -> Self {
        TrimPolicy::Auto {
            threshold: DEFAULT_TRIM_THRESHOLD,
        }
    }
}

pub const DEFAULT_TRIM_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimMode {
    Linear,
    Binary,
}

/// Linear trimming unless the boundary cell is more than `threshold` times
/// fuller than a uniform distribution would make it.
pub fn trim_mode_select(cell_count: usize, expected: f64, threshold: f64) -> TrimMode {
    if cell_count as f64 <= threshold * expected {
        TrimMode::Linear
    } else {
        TrimMode::Binary
    }
}

/// Cost model for choosing the projection dimension: ordered reads are
/// `r = max(1, scale·(log10(n_p) − offset))` times cheaper than random ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessRatio {
    pub scale: f64,
    pub offset: f64,
}

impl Default for AccessRatio {
    fn default() -> Self {
        Self {
            scale: 1.5,
            offset: 3.0,
        }
    }
}

impl AccessRatio {
    pub fn ratio(&self, n_p: usize) -> f64 {
        (self.scale * ((n_p.max(1) as f64).log10() - self.offset)).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchOptions {
    pub trim: TrimPolicy,
    pub access: AccessRatio,
}

/// Hooks for instrumented searches. The unit type ignores everything.
pub trait SearchObserver {
    fn skipped(&mut self, _subdb: usize) {}
    fn projected(&mut self, _subdb: usize, _dim: usize, _candidates: usize) {}
    fn trimmed(&mut self, _outcome: &TrimOutcome) {}
}

impl SearchObserver for () {}

/// Counters collected by an instrumented search.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub skipped_subdbs: Vec<usize>,
    /// `(sub-database, projection dimension)` for every searched sub-database.
    pub projections: Vec<(usize, usize)>,
    /// Points checked against the remaining dimensions.
    pub candidates: usize,
    pub trim_comparisons: usize,
    pub extraneous: usize,
    pub linear_trims: usize,
    pub binary_trims: usize,
}

impl SearchObserver for SearchStats {
    fn skipped(&mut self, subdb: usize) {
        self.skipped_subdbs.push(subdb);
    }

    fn projected(&mut self, subdb: usize, dim: usize, candidates: usize) {
        self.projections.push((subdb, dim));
        self.candidates += candidates;
    }

    fn trimmed(&mut self, t: &TrimOutcome) {
        self.trim_comparisons += t.comparisons;
        self.extraneous += t.extraneous();
        for mode in [t.lower_mode, t.upper_mode] {
            match mode {
                TrimMode::Linear => self.linear_trims += 1,
                TrimMode::Binary => self.binary_trims += 1,
            }
        }
    }
}

/// A k-vector window with its two boundary cells. The exact lower rank lies
/// in `lower_cell` (inclusive of its end) and the exact upper rank in
/// `upper_cell`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWindow {
    pub lower_cell: Range<usize>,
    pub upper_cell: Range<usize>,
}

impl KWindow {
    pub fn from_bounds(k: &[usize], w: WindowBounds) -> Self {
        let last = k.len() - 1;
        Self {
            lower_cell: k[w.lower]..k[(w.lower + 1).min(last)],
            upper_cell: k[w.upper.saturating_sub(1)]..k[w.upper],
        }
    }

    pub fn span(&self) -> Range<usize> {
        self.lower_cell.start..self.upper_cell.end
    }

    pub fn count(&self) -> usize {
        self.upper_cell.end - self.lower_cell.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrimOutcome {
    pub window: Range<usize>,
    pub exact: Range<usize>,
    pub comparisons: usize,
    pub lower_mode: TrimMode,
    pub upper_mode: TrimMode,
}

impl TrimOutcome {
    /// Window elements that fell outside the interval.
    pub fn extraneous(&self) -> usize {
        (self.exact.start - self.window.start) + (self.window.end - self.exact.end)
    }
}

/// Narrows a k-vector window over a sorted view to the exact positions
/// `[first value ≥ a, first value > b)`.
///
/// `value_at(i)` returns the `i`-th smallest value, with `i` in the window's
/// coordinate space. `expected` is the mean cell occupancy `n_p / n_k`.
pub fn trim_extremes<F: Fn(usize) -> f64>(
    value_at: F,
    window: &KWindow,
    a: f64,
    b: f64,
    policy: TrimPolicy,
    expected: f64,
) -> TrimOutcome {
    let mode_for = |cell: &Range<usize>| match policy {
        TrimPolicy::Linear => TrimMode::Linear,
        TrimPolicy::Binary => TrimMode::Binary,
        TrimPolicy::Auto { threshold } => trim_mode_select(cell.len(), expected, threshold),
    };
    let lower_mode = mode_for(&window.lower_cell);
    let upper_mode = mode_for(&window.upper_cell);
    let mut comparisons = 0;

    let lo = {
        let cell = &window.lower_cell;
        match lower_mode {
            TrimMode::Linear => {
                let mut i = cell.start;
                while i < cell.end {
                    comparisons += 1;
                    if value_at(i) >= a {
                        break;
                    }
                    i += 1;
                }
                i
            }
            TrimMode::Binary => {
                partition_point_counted(cell.clone(), |i| value_at(i) < a, &mut comparisons)
            }
        }
    };
    let hi = {
        let cell = &window.upper_cell;
        match upper_mode {
            TrimMode::Linear => {
                let mut j = cell.end;
                while j > cell.start {
                    comparisons += 1;
                    if value_at(j - 1) <= b {
                        break;
                    }
                    j -= 1;
                }
                j
            }
            TrimMode::Binary => {
                partition_point_counted(cell.clone(), |i| value_at(i) <= b, &mut comparisons)
            }
        }
    };
    TrimOutcome {
        window: window.span(),
        exact: lo..hi.max(lo),
        comparisons,
        lower_mode,
        upper_mode,
    }
}

/// First index in `range` where `pred` turns false; `pred` must be monotone.
pub(crate) fn partition_point_counted<P: Fn(usize) -> bool>(
    range: Range<usize>,
    pred: P,
    comparisons: &mut usize,
) -> usize {
    let (mut lo, mut hi) = (range.start, range.end);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *comparisons += 1;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Window counts per dimension and the ascending order they induce.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DimCounts {
    pub p: Vec<usize>,
    /// `p` sorted ascending.
    pub g: Vec<usize>,
    /// Dimensions in ascending-`p` order, ties by lower index.
    pub order: Vec<usize>,
}

impl DimCounts {
    pub fn from_counts(p: Vec<usize>) -> Self {
        let mut c = Self::default();
        c.refill(p.into_iter());
        c
    }

    /// Recomputes everything from new counts, reusing the buffers.
    pub(crate) fn refill<I: Iterator<Item = usize>>(&mut self, p: I) {
        self.p.clear();
        self.p.extend(p);
        self.order.clear();
        self.g.clear();
        // Stable insertion sort: d is small, and equal counts keep the lower
        // dimension first.
        for (j, &c) in self.p.iter().enumerate() {
            let mut at = self.g.len();
            while at > 0 && self.g[at - 1] > c {
                at -= 1;
            }
            self.g.insert(at, c);
            self.order.insert(at, j);
        }
    }

    pub fn any_empty(&self) -> bool {
        self.g.first() == Some(&0)
    }
}

/// Projects on the smallest-count dimension only if dimension 0 (contiguous
/// in memory) holds more than `r` times as many candidates.
pub fn select_projection_dimension(counts: &DimCounts, n_p: usize, access: &AccessRatio) -> usize {
    projection_for_ratio(counts, access.ratio(n_p))
}

#[inline]
fn projection_for_ratio(counts: &DimCounts, r: f64) -> usize {
    if counts.p[0] as f64 > r * counts.g[0] as f64 {
        counts.order[0]
    } else {
        0
    }
}

fn require_full(pre: &PreprocessedDatabase) -> Result<()> {
    match (&pre.index, &pre.kvectors) {
        (Some(_), Some(kv)) if kv.dims() == pre.dims() => Ok(()),
        (None, _) => Err(Error::MissingAuxiliary("index arrays")),
        _ => Err(Error::MissingAuxiliary("k-vector arrays")),
    }
}

/// k-vector windows for every dimension of sub-database `s`.
fn windows_for(pre: &PreprocessedDatabase, s: usize, q: &RangeQuery, out: &mut Vec<KWindow>) {
    let kv = pre.kvectors.as_ref().expect("k-vectors present");
    out.clear();
    for j in 0..kv.dims() {
        let k = kv.kvec(s, j);
        let w = map_range(kv.line(s, j), q.lower(j), q.upper(j), kv.n_k());
        out.push(KWindow::from_bounds(k, w));
    }
}

/// Window counts `p(j) = k_j(B_j) − k_j(A_j)` for sub-database `s`.
pub fn estimate_counts(pre: &PreprocessedDatabase, s: usize, q: &RangeQuery) -> Result<DimCounts> {
    require_full(pre)?;
    q.validate(pre.dims())?;
    let mut windows = Vec::new();
    windows_for(pre, s, q, &mut windows);
    Ok(DimCounts::from_counts(
        windows.iter().map(KWindow::count).collect(),
    ))
}

/// Reusable per-query buffers.
#[derive(Default)]
pub(crate) struct Scratch {
    windows: Vec<KWindow>,
    counts: DimCounts,
    checks: Vec<usize>,
    /// Last `(n_p, r)` pair: sub-databases share at most two sizes.
    ratio: Option<(usize, f64)>,
}

impl Scratch {
    #[inline]
    fn access_ratio(&mut self, access: &AccessRatio, n_p: usize) -> f64 {
        match self.ratio {
            Some((len, r)) if len == n_p => r,
            _ => {
                let r = access.ratio(n_p);
                self.ratio = Some((n_p, r));
                r
            }
        }
    }
}

/// True when sub-database `s`'s last-dimension span lies inside the query.
#[inline]
pub(crate) fn last_dim_covered(pre: &PreprocessedDatabase, s: usize, q: &RangeQuery) -> bool {
    let last = pre.dims() - 1;
    pre.minima[s] >= q.lower(last) && pre.maxima[s] <= q.upper(last)
}

/// Checks `candidates` in dimensions `checks` and pushes the original ids of
/// the survivors.
#[inline]
pub(crate) fn verify_into<I: Iterator<Item = usize>>(
    sdb: &StructuredDatabase,
    q: &RangeQuery,
    candidates: I,
    checks: &[usize],
    out: &mut Vec<usize>,
) {
    let bounds = q.bounds();
    let perm = sdb.perm();
    match *checks {
        [] => {
            out.extend(candidates.map(|g| perm[g]));
            return;
        }
        [j] => {
            let (a, b) = bounds[j];
            let d = sdb.dims();
            let coords = sdb.as_flat();
            out.extend(candidates.filter_map(|g| {
                let v = coords[g * d + j];
                (a <= v && v <= b).then(|| perm[g])
            }));
            return;
        }
        _ => {}
    }
    for g in candidates {
        let row = sdb.point(g);
        if checks.iter().all(|&j| {
            let v = row[j];
            let (a, b) = bounds[j];
            a <= v && v <= b
        }) {
            out.push(perm[g]);
        }
    }
}

/// Expected elements per k-vector cell.
#[inline]
pub(crate) fn cell_occupancy(len: usize, n_k: usize) -> f64 {
    len as f64 / n_k as f64
}

/// Searches one sub-database of a full structure; `q` must already be valid.
pub(crate) fn search_subdatabase_into<O: SearchObserver>(
    pre: &PreprocessedDatabase,
    s: usize,
    q: &RangeQuery,
    opts: &SearchOptions,
    scratch: &mut Scratch,
    obs: &mut O,
    out: &mut Vec<usize>,
) {
    let sdb = &pre.structure;
    let index = pre.index.as_ref().expect("index present");
    let d = sdb.dims();
    let range = sdb.subdb_range(s);

    // Windows are filled last dimension first, the likeliest to be empty,
    // and the sub-database is dropped at the first empty one.
    let kv = pre.kvectors.as_ref().expect("k-vectors present");
    if scratch.windows.len() != d {
        let empty = KWindow {
            lower_cell: 0..0,
            upper_cell: 0..0,
        };
        scratch.windows.resize(d, empty);
    }
    let skip_last = last_dim_covered(pre, s, q);
    let mapped = if skip_last {
        // The whole sub-database matches the last interval; its window is
        // the full range and never beats dimension 0 as a projection.
        scratch.windows[d - 1] = KWindow {
            lower_cell: range.start..range.start,
            upper_cell: range.end..range.end,
        };
        d - 1
    } else {
        d
    };
    for j in (0..mapped).rev() {
        let w = map_range(kv.line(s, j), q.lower(j), q.upper(j), kv.n_k());
        let window = KWindow::from_bounds(kv.kvec(s, j), w);
        if window.count() == 0 {
            obs.skipped(s);
            return;
        }
        scratch.windows[j] = window;
    }
    scratch
        .counts
        .refill(scratch.windows.iter().map(KWindow::count));
    let r = scratch.access_ratio(&opts.access, range.len());
    let counts = &scratch.counts;
    let dim = projection_for_ratio(counts, r);
    let expected = cell_occupancy(range.len(), pre.n_k);
    let (a, b) = (q.lower(dim), q.upper(dim));
    let window = &scratch.windows[dim];

    scratch.checks.clear();
    scratch.checks.extend(
        counts
            .order
            .iter()
            .copied()
            .filter(|&j| j != dim && !(skip_last && j == d - 1)),
    );

    if dim == 0 {
        let t = trim_extremes(|i| sdb.coord(i, 0), window, a, b, opts.trim, expected);
        obs.trimmed(&t);
        obs.projected(s, dim, t.exact.len());
        verify_into(sdb, q, t.exact, &scratch.checks, out);
    } else {
        let map = index.slice(dim, range.clone());
        let start = range.start;
        let t = trim_extremes(
            |i| sdb.coord(map[i - start], dim),
            window,
            a,
            b,
            opts.trim,
            expected,
        );
        obs.trimmed(&t);
        obs.projected(s, dim, t.exact.len());
        let slice = &map[t.exact.start - start..t.exact.end - start];
        verify_into(sdb, q, slice.iter().copied(), &scratch.checks, out);
    }
}

/// Searches sub-database `s` alone and returns the original ids it holds.
pub fn search_subdatabase(
    pre: &PreprocessedDatabase,
    s: usize,
    q: &RangeQuery,
) -> Result<QueryResult> {
    require_full(pre)?;
    q.validate(pre.dims())?;
    let mut out = Vec::new();
    search_subdatabase_into(
        pre,
        s,
        q,
        &SearchOptions::default(),
        &mut Scratch::default(),
        &mut (),
        &mut out,
    );
    Ok(QueryResult::new(out))
}

/// Index of the first sub-database whose last-dimension values can reach `a`.
#[inline]
pub(crate) fn first_candidate_subdb(minima: &[f64], a: f64) -> usize {
    minima.partition_point(|&m| m < a).saturating_sub(1)
}

/// One past the last sub-database whose minimum is at most `b`.
#[inline]
pub(crate) fn end_candidate_subdb(minima: &[f64], b: f64) -> usize {
    minima.partition_point(|&m| m <= b)
}

pub(crate) fn search_full<O: SearchObserver>(
    pre: &PreprocessedDatabase,
    q: &RangeQuery,
    opts: &SearchOptions,
    obs: &mut O,
) -> Vec<usize> {
    let last = pre.dims() - 1;
    let (a_last, b_last) = (q.lower(last), q.upper(last));
    let mut scratch = Scratch::default();
    let mut out = Vec::new();

    // Sub-databases are ordered by the last dimension: start at the last one
    // whose minimum lies below the interval and stop after the first one that
    // starts beyond it. That one is still visited, so the window test is what
    // rejects it.
    for s in first_candidate_subdb(&pre.minima, a_last)..pre.n_db() {
        search_subdatabase_into(pre, s, q, opts, &mut scratch, obs, &mut out);
        if pre.minima[s] > b_last {
            break;
        }
    }
    out
}

pub(crate) fn search_full_parallel(
    pre: &PreprocessedDatabase,
    q: &RangeQuery,
    opts: &SearchOptions,
) -> Vec<usize> {
    let last = pre.dims() - 1;
    let first = first_candidate_subdb(&pre.minima, q.lower(last));
    let end = end_candidate_subdb(&pre.minima, q.upper(last)).max(first);
    (first..end)
        .into_par_iter()
        .fold(
            || (Scratch::default(), Vec::new()),
            |(mut scratch, mut out), s| {
                search_subdatabase_into(pre, s, q, opts, &mut scratch, &mut (), &mut out);
                (scratch, out)
            },
        )
        .map(|(_, out)| out)
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
}

/// Full-structure search: the union over sub-databases, as original ids.
pub fn search(pre: &PreprocessedDatabase, q: &RangeQuery) -> Result<QueryResult> {
    require_full(pre)?;
    q.validate(pre.dims())?;
    Ok(QueryResult::new(search_full(
        pre,
        q,
        &SearchOptions::default(),
        &mut (),
    )))
}

impl PreprocessedDatabase {
    /// Searches with the algorithm matching the arrays this structure holds.
    pub fn search(&self, q: &RangeQuery) -> Result<QueryResult> {
        self.search_with(q, &SearchOptions::default(), &mut ())
    }

    pub fn search_with<O: SearchObserver>(
        &self,
        q: &RangeQuery,
        opts: &SearchOptions,
        obs: &mut O,
    ) -> Result<QueryResult> {
        q.validate(self.dims())?;
        let ids = match &self.kvectors {
            Some(kv) if self.index.is_some() && kv.dims() == self.dims() => {
                search_full(self, q, opts, obs)
            }
            Some(_) => crate::reduced::no_index_search(self, q, opts, obs),
            None => crate::reduced::no_kvector_search(self, q, opts, obs),
        };
        Ok(QueryResult::new(ids))
    }

    /// Like [`search`](Self::search), also returning instrumentation counters.
    pub fn search_stats(&self, q: &RangeQuery) -> Result<(QueryResult, SearchStats)> {
        let mut stats = SearchStats::default();
        let r = self.search_with(q, &SearchOptions::default(), &mut stats)?;
        Ok((r, stats))
    }

    /// Searches candidate sub-databases concurrently. Falls back to the
    /// sequential path for reduced variants.
    pub fn search_parallel(&self, q: &RangeQuery) -> Result<QueryResult> {
        if require_full(self).is_err() {
            return self.search(q);
        }
        q.validate(self.dims())?;
        Ok(QueryResult::new(search_full_parallel(
            self,
            q,
            &SearchOptions::default(),
        )))
    }
}
