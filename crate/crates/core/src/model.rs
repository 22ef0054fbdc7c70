//! Domain types shared by every index: the point table, the box query, and
//! the result set.

use crate::error::{Error, Result};

/// A static table of `n` points with `d` finite coordinates each, stored
/// row-major. Row position is the point's original identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    coords: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from a flat row-major buffer of `coords.len() / d` rows.
    pub fn from_flat(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimensions);
        }
        if coords.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !coords.len().is_multiple_of(d) {
            let row = coords.len() / d;
            return Err(Error::RaggedRow {
                row,
                expected: d,
                found: coords.len() % d,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                row: pos / d,
                dim: pos % d,
            });
        }
        let n = coords.len() / d;
        Ok(Self { coords, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyDataset)?;
        let d = first.as_ref().len();
        if d == 0 {
            return Err(Error::ZeroDimensions);
        }
        let mut coords = Vec::with_capacity(rows.len() * d);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::RaggedRow {
                    row,
                    expected: d,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::from_flat(d, coords)
    }

    /// Builds a dataset from one vector per dimension (column-major input,
    /// as the worked tables in the docs are written).
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::ZeroDimensions);
        }
        let n = columns[0].as_ref().len();
        if columns.iter().any(|c| c.as_ref().len() != n) {
            return Err(Error::InvalidArgument(
                "columns have different lengths".into(),
            ));
        }
        let mut coords = Vec::with_capacity(n * d);
        for i in 0..n {
            coords.extend(columns.iter().map(|c| c.as_ref()[i]));
        }
        Self::from_flat(d, coords)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: a dataset holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn coord(&self, i: usize, j: usize) -> f64 {
        self.coords[i * self.d + j]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    /// Values of dimension `j` in row order.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }
}

/// An orthogonal box query: one inclusive interval `[a_j, b_j]` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeQuery {
    bounds: Vec<(f64, f64)>,
}

impl RangeQuery {
    /// Wraps the bounds without checking them; see [`validate_query`].
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self { bounds }
    }

    /// A query covering every point of `ds`.
    pub fn covering(ds: &Dataset) -> Self {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); ds.dims()];
        for row in ds.rows() {
            for (b, &v) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        Self { bounds }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    #[inline]
    pub fn lower(&self, j: usize) -> f64 {
        self.bounds[j].0
    }

    #[inline]
    pub fn upper(&self, j: usize) -> f64 {
        self.bounds[j].1
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    #[inline]
    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(&self.bounds)
            .all(|(&v, &(a, b))| a <= v && v <= b)
    }

    pub fn validate(&self, d: usize) -> Result<&Self> {
        if self.bounds.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.bounds.len(),
            });
        }
        for (dim, &(lower, upper)) in self.bounds.iter().enumerate() {
            if !lower.is_finite() || !upper.is_finite() {
                return Err(Error::NonFiniteBound { dim });
            }
            if lower > upper {
                return Err(Error::InvertedInterval { dim, lower, upper });
            }
        }
        Ok(self)
    }

    /// Parses `"a0:b0,a1:b1,..."`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bounds = spec
            .split(',')
            .map(|pair| {
                let (a, b) = pair.trim().split_once(':').ok_or_else(|| {
                    Error::InvalidArgument(format!("interval {pair:?} is not of the form a:b"))
                })?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("{s:?}: {e}")))
                };
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bounds })
    }
}

/// Checks that `q` is a well-formed box over `d` dimensions and hands it back.
pub fn validate_query(q: RangeQuery, d: usize) -> Result<RangeQuery> {
    q.validate(d)?;
    Ok(q)
}

/// Original row identifiers of the points matching a query. Order is
/// unspecified; use [`QueryResult::sorted`] for comparisons.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryResult {
    pub ids: Vec<usize>,
}

impl QueryResult {
    pub fn new(ids: Vec<usize>) -> Self {
        Self { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn sorted(mut self) -> Self {
        self.ids.sort_unstable();
        self
    }

    pub fn same_set(&self, other: &QueryResult) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut a = self.ids.clone();
        let mut b = other.ids.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}
