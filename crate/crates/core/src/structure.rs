//! One-time preprocessing: the two-level sorted point table and its
//! auxiliary arrays.
//!
//! Points are sorted by the last dimension, cut into `n_db` contiguous
//! sub-databases of nearly equal size (the first one absorbs the remainder),
//! and each sub-database is re-sorted by dimension 0. On top of that table we
//! keep, per sub-database:
//!
//! * an index array for every dimension `j ≥ 1`, listing the sub-database's
//!   rows in ascending order of coordinate `j` (dimension 0 needs none);
//! * a mapping line and a k-vector for every dimension;
//! * the minimum and maximum of the last dimension.
//!
//! All sorts are stable: equal coordinates keep their previous relative order.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::line::{build_kvector_array, fit_line, LineParams};
use crate::model::Dataset;

/// Which auxiliary arrays a [`PreprocessedDatabase`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Index arrays plus k-vectors for every dimension.
    #[default]
    Full,
    /// No index arrays; k-vectors for dimension 0 only.
    NoIndex,
    /// Index arrays, no k-vectors (windows come from binary searches).
    NoKVector,
    /// Neither: only the sorted table and the sub-database minima.
    NoKVectorNoIndex,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::NoIndex,
        Variant::NoKVector,
        Variant::NoKVectorNoIndex,
    ];

    pub fn from_flags(has_index: bool, has_kvector: bool) -> Self {
        match (has_index, has_kvector) {
            (true, true) => Variant::Full,
            (false, true) => Variant::NoIndex,
            (true, false) => Variant::NoKVector,
            (false, false) => Variant::NoKVectorNoIndex,
        }
    }

    pub fn has_index(self) -> bool {
        matches!(self, Variant::Full | Variant::NoKVector)
    }

    pub fn has_kvector(self) -> bool {
        matches!(self, Variant::Full | Variant::NoIndex)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoIndex => "noindex",
            Variant::NoKVector => "nokv",
            Variant::NoKVectorNoIndex => "nokv-noindex",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildConfig {
    /// Sub-database count; defaults to `⌈√n⌉`.
    pub n_db: Option<usize>,
    /// k-vector entries per (sub-database, dimension); defaults to `⌈n_p/10⌉`.
    pub n_k: Option<usize>,
    pub variant: Variant,
}

impl BuildConfig {
    pub fn new(n_db: usize, n_k: usize) -> Self {
        Self {
            n_db: Some(n_db),
            n_k: Some(n_k),
            variant: Variant::Full,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

pub fn default_n_db(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).clamp(1, n.max(1))
}

pub fn default_n_k(n_p: usize) -> usize {
    n_p.div_ceil(10).max(2)
}

/// `(n_p_first, n_p)` for `n` elements split into `n_db` sub-databases.
pub fn partition_counts(n: usize, n_db: usize) -> Result<(usize, usize)> {
    if n_db == 0 || n_db > n {
        return Err(Error::SubDatabaseCount { n_db, n });
    }
    let n_p = n / n_db;
    Ok((n - n_p * (n_db - 1), n_p))
}

/// Order-preserving integer key for a finite float; `-0.0` and `0.0` collide.
#[inline]
pub(crate) fn sort_key(v: f64) -> u64 {
    let bits = (v + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// The point table in two-level sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredDatabase {
    points: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
    d: usize,
    n_db: usize,
    n_p: usize,
    n_p_first: usize,
}

impl StructuredDatabase {
    pub(crate) fn from_parts(
        points: Vec<f64>,
        perm: Vec<usize>,
        d: usize,
        n_db: usize,
    ) -> Result<Self> {
        let n = perm.len();
        if d == 0 || points.len() != n * d {
            return Err(Error::Inconsistent(format!(
                "{} coordinates for {n} points of dimension {d}",
                points.len()
            )));
        }
        let (n_p_first, n_p) = partition_counts(n, n_db)?;
        Ok(Self {
            points,
            perm,
            n,
            d,
            n_db,
            n_p,
            n_p_first,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn n_db(&self) -> usize {
        self.n_db
    }

    /// Elements in every sub-database but the first.
    #[inline]
    pub fn n_p(&self) -> usize {
        self.n_p
    }

    #[inline]
    pub fn n_p_first(&self) -> usize {
        self.n_p_first
    }

    #[inline]
    pub fn subdb_start(&self, s: usize) -> usize {
        if s == 0 {
            0
        } else {
            self.n_p_first + (s - 1) * self.n_p
        }
    }

    #[inline]
    pub fn subdb_range(&self, s: usize) -> Range<usize> {
        let start = self.subdb_start(s);
        let len = if s == 0 { self.n_p_first } else { self.n_p };
        start..start + len
    }

    /// Structured position → original row id.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn coord(&self, i: usize, j: usize) -> f64 {
        self.points[i * self.d + j]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    /// Rebuilds the dataset in its original row order.
    pub fn to_dataset(&self) -> Dataset {
        let mut coords = vec![0.0; self.points.len()];
        for (i, &id) in self.perm.iter().enumerate() {
            coords[id * self.d..(id + 1) * self.d].copy_from_slice(self.point(i));
        }
        Dataset::from_flat(self.d, coords).expect("structured table holds a valid dataset")
    }
}

/// Sorts `items` by `(key, tiebreak)`; equivalent to a stable sort by key when
/// the tiebreak is the prior position.
fn sort_pairs(items: &mut [(u64, usize)]) {
    items.sort_unstable();
}

pub fn build_structure(ds: &Dataset, n_db: usize) -> Result<StructuredDatabase> {
    let (n, d) = (ds.len(), ds.dims());
    partition_counts(n, n_db)?;
    let last = d - 1;

    let mut pairs: Vec<(u64, usize)> = (0..n).map(|i| (sort_key(ds.coord(i, last)), i)).collect();
    sort_pairs(&mut pairs);
    let by_last: Vec<usize> = pairs.iter().map(|&(_, i)| i).collect();

    // One global gather into last-dimension order; every later step only
    // touches a single sub-database, which stays cache-resident.
    let mut staged = Vec::with_capacity(n * d);
    for &id in &by_last {
        staged.extend_from_slice(ds.point(id));
    }

    let mut sdb = StructuredDatabase::from_parts(vec![0.0; n * d], vec![0; n], d, n_db)?;
    let mut perm = vec![0; n];
    for s in 0..n_db {
        let range = sdb.subdb_range(s);
        let chunk = &mut pairs[range.clone()];
        for (slot, pos) in chunk.iter_mut().zip(range.clone()) {
            *slot = (sort_key(staged[pos * d]), pos);
        }
        if d > 1 {
            sort_pairs(chunk);
        }
        for (i, &(_, pos)) in range.zip(chunk.iter()) {
            perm[i] = by_last[pos];
            sdb.points[i * d..(i + 1) * d].copy_from_slice(&staged[pos * d..(pos + 1) * d]);
        }
    }
    sdb.perm = perm;
    Ok(sdb)
}

/// Per-dimension (`j ≥ 1`) maps from sorted position to structured index.
/// Entry `i` of sub-database `s`'s slice is the global structured index of the
/// `i`-th smallest coordinate `j` within that sub-database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexArray {
    n: usize,
    d: usize,
    maps: Vec<usize>,
}

impl IndexArray {
    pub(crate) fn from_parts(n: usize, d: usize, maps: Vec<usize>) -> Result<Self> {
        if maps.len() != n * d.saturating_sub(1) {
            return Err(Error::Inconsistent(format!(
                "index array has {} entries, expected {}",
                maps.len(),
                n * d.saturating_sub(1)
            )));
        }
        Ok(Self { n, d, maps })
    }

    /// Sorted-order map of dimension `j ≥ 1` over the structured range `range`
    /// (which must be a whole sub-database or lie within one).
    #[inline]
    pub fn slice(&self, j: usize, range: Range<usize>) -> &[usize] {
        debug_assert!(j >= 1 && j < self.d);
        let base = (j - 1) * self.n;
        &self.maps[base + range.start..base + range.end]
    }

    pub fn as_flat(&self) -> &[usize] {
        &self.maps
    }

    pub fn entries(&self) -> usize {
        self.maps.len()
    }
}

pub fn build_index_arrays(sdb: &StructuredDatabase) -> IndexArray {
    let (n, d) = (sdb.len(), sdb.dims());
    let mut maps = Vec::with_capacity(n * d.saturating_sub(1));
    let mut pairs = Vec::new();
    for j in 1..d {
        for s in 0..sdb.n_db() {
            pairs.clear();
            pairs.extend(sdb.subdb_range(s).map(|g| (sort_key(sdb.coord(g, j)), g)));
            sort_pairs(&mut pairs);
            maps.extend(pairs.iter().map(|&(_, g)| g));
        }
    }
    IndexArray { n, d, maps }
}

/// Mapping lines and k-vectors for the first `dims` dimensions of every
/// sub-database, sub-database-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KVectorTable {
    dims: usize,
    n_k: usize,
    lines: Vec<LineParams>,
    k: Vec<usize>,
}

impl KVectorTable {
    pub(crate) fn from_parts(
        dims: usize,
        n_k: usize,
        lines: Vec<LineParams>,
        k: Vec<usize>,
    ) -> Result<Self> {
        if dims == 0 || !lines.len().is_multiple_of(dims) || k.len() != lines.len() * n_k {
            return Err(Error::Inconsistent(format!(
                "k-vector table sizes disagree: {} lines, {} entries, {dims} dims, n_k {n_k}",
                lines.len(),
                k.len()
            )));
        }
        Ok(Self {
            dims,
            n_k,
            lines,
            k,
        })
    }

    /// Number of dimensions covered (all of them, or only dimension 0).
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    #[inline]
    pub fn line(&self, s: usize, j: usize) -> &LineParams {
        &self.lines[s * self.dims + j]
    }

    #[inline]
    pub fn kvec(&self, s: usize, j: usize) -> &[usize] {
        let base = (s * self.dims + j) * self.n_k;
        &self.k[base..base + self.n_k]
    }

    pub fn lines(&self) -> &[LineParams] {
        &self.lines
    }

    pub fn entries(&self) -> &[usize] {
        &self.k
    }
}

/// The complete searchable structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedDatabase {
    pub(crate) structure: StructuredDatabase,
    pub(crate) index: Option<IndexArray>,
    pub(crate) kvectors: Option<KVectorTable>,
    pub(crate) n_k: usize,
    /// Minimum last-dimension value of each sub-database.
    pub(crate) minima: Vec<f64>,
    /// Maximum last-dimension value of each sub-database (derived, not stored).
    pub(crate) maxima: Vec<f64>,
}

impl PreprocessedDatabase {
    pub fn build(ds: &Dataset, cfg: &BuildConfig) -> Result<Self> {
        preprocess(ds, cfg)
    }

    pub(crate) fn assemble(
        structure: StructuredDatabase,
        index: Option<IndexArray>,
        kvectors: Option<KVectorTable>,
        n_k: usize,
        minima: Vec<f64>,
    ) -> Result<Self> {
        let spans = last_dim_spans(&structure);
        if minima.len() != structure.n_db() {
            return Err(Error::Inconsistent(format!(
                "{} sub-database minima for {} sub-databases",
                minima.len(),
                structure.n_db()
            )));
        }
        let maxima = spans.into_iter().map(|(_, hi)| hi).collect();
        Ok(Self {
            structure,
            index,
            kvectors,
            n_k,
            minima,
            maxima,
        })
    }

    pub fn structure(&self) -> &StructuredDatabase {
        &self.structure
    }

    pub fn index(&self) -> Option<&IndexArray> {
        self.index.as_ref()
    }

    pub fn kvectors(&self) -> Option<&KVectorTable> {
        self.kvectors.as_ref()
    }

    pub fn variant(&self) -> Variant {
        Variant::from_flags(self.index.is_some(), self.kvectors.is_some())
    }

    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.structure.dims()
    }

    pub fn n_db(&self) -> usize {
        self.structure.n_db()
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn subdb_minima(&self) -> &[f64] {
        &self.minima
    }

    pub fn subdb_maxima(&self) -> &[f64] {
        &self.maxima
    }

    /// Auxiliary storage, in stored numbers: `(index entries, k-vector
    /// entries, line parameters, minima)`.
    pub fn auxiliary_counts(&self) -> (usize, usize, usize, usize) {
        let index = self.index.as_ref().map_or(0, IndexArray::entries);
        let (k, lines) = self
            .kvectors
            .as_ref()
            .map_or((0, 0), |t| (t.k.len(), 2 * t.lines.len()));
        (index, k, lines, self.minima.len())
    }
}

fn last_dim_spans(sdb: &StructuredDatabase) -> Vec<(f64, f64)> {
    let last = sdb.dims() - 1;
    (0..sdb.n_db())
        .map(|s| {
            sdb.subdb_range(s)
                .map(|i| sdb.coord(i, last))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                })
        })
        .collect()
}

fn build_kvector_table(
    sdb: &StructuredDatabase,
    index: Option<&IndexArray>,
    dims: usize,
    n_k: usize,
) -> Result<KVectorTable> {
    let mut lines = Vec::with_capacity(sdb.n_db() * dims);
    let mut k = Vec::with_capacity(sdb.n_db() * dims * n_k);
    let mut sorted = Vec::new();
    for s in 0..sdb.n_db() {
        let range = sdb.subdb_range(s);
        for j in 0..dims {
            sorted.clear();
            if j == 0 {
                sorted.extend(range.clone().map(|g| sdb.coord(g, 0)));
            } else {
                let index = index.ok_or(Error::MissingAuxiliary("index arrays"))?;
                sorted.extend(
                    index
                        .slice(j, range.clone())
                        .iter()
                        .map(|&g| sdb.coord(g, j)),
                );
            }
            let line = fit_line(sorted[0], sorted[sorted.len() - 1], n_k)?;
            k.extend(build_kvector_array(&sorted, &line, n_k, range.start));
            lines.push(line);
        }
    }
    KVectorTable::from_parts(dims, n_k, lines, k)
}

/// Builds the structure and every auxiliary array `cfg.variant` calls for.
pub fn preprocess(ds: &Dataset, cfg: &BuildConfig) -> Result<PreprocessedDatabase> {
    let n = ds.len();
    let n_db = cfg.n_db.unwrap_or_else(|| default_n_db(n));
    let (_, n_p) = partition_counts(n, n_db)?;
    let n_k = cfg.n_k.unwrap_or_else(|| default_n_k(n_p));
    if n_k < 2 {
        return Err(Error::GridTooSmall(n_k));
    }

    let structure = build_structure(ds, n_db)?;
    let index = cfg
        .variant
        .has_index()
        .then(|| build_index_arrays(&structure));
    let kvectors = if cfg.variant.has_kvector() {
        let dims = if index.is_some() { structure.dims() } else { 1 };
        Some(build_kvector_table(&structure, index.as_ref(), dims, n_k)?)
    } else {
        None
    };
    let minima = last_dim_spans(&structure)
        .into_iter()
        .map(|(lo, _)| lo)
        .collect();
    PreprocessedDatabase::assemble(structure, index, kvectors, n_k, minima)
}
