//! Reference algorithms: a linear scan (the correctness oracle) and a
//! textbook median-split k-d tree.

use crate::error::Result;
use crate::model::{Dataset, QueryResult, RangeQuery};

/// Scans every point, checking dimensions in order with early exit.
pub fn brute_force_search(ds: &Dataset, q: &RangeQuery) -> Result<QueryResult> {
    q.validate(ds.dims())?;
    let ids = ds
        .rows()
        .enumerate()
        .filter(|(_, row)| q.contains(row))
        .map(|(i, _)| i)
        .collect();
    Ok(QueryResult::new(ids))
}

const LEAF_SIZE: usize = 8;

/// Implicit balanced k-d tree. The node covering `lo..hi` splits at
/// `mid = (lo + hi) / 2` on dimension `depth % d`; ranges of at most
/// [`LEAF_SIZE`] points are leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    coords: Vec<f64>,
    ids: Vec<usize>,
    d: usize,
}

impl KdTree {
    pub fn build(ds: &Dataset) -> Self {
        let d = ds.dims();
        let mut ids: Vec<usize> = (0..ds.len()).collect();
        let mut stack = vec![(0, ids.len(), 0)];
        while let Some((lo, hi, axis)) = stack.pop() {
            if hi - lo <= LEAF_SIZE {
                continue;
            }
            let mid = lo + (hi - lo) / 2;
            // Ties on the split coordinate break by original id.
            ids[lo..hi].select_nth_unstable_by(mid - lo, |&x, &y| {
                ds.coord(x, axis)
                    .total_cmp(&ds.coord(y, axis))
                    .then(x.cmp(&y))
            });
            let next = (axis + 1) % d;
            stack.push((lo, mid, next));
            stack.push((mid + 1, hi, next));
        }
        let mut coords = Vec::with_capacity(ds.len() * d);
        for &id in &ids {
            coords.extend_from_slice(ds.point(id));
        }
        Self { coords, ids, d }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn search(&self, q: &RangeQuery) -> Result<QueryResult> {
        Ok(self.search_counted(q)?.0)
    }

    /// Returns the matches and the number of points tested against the box.
    pub fn search_counted(&self, q: &RangeQuery) -> Result<(QueryResult, usize)> {
        q.validate(self.d)?;
        let mut out = Vec::new();
        let mut examined = 0;
        let mut stack = vec![(0, self.ids.len(), 0)];
        while let Some((lo, hi, axis)) = stack.pop() {
            if hi - lo <= LEAF_SIZE {
                for i in lo..hi {
                    examined += 1;
                    if q.contains(self.point(i)) {
                        out.push(self.ids[i]);
                    }
                }
                continue;
            }
            let mid = lo + (hi - lo) / 2;
            let split = self.point(mid)[axis];
            examined += 1;
            if q.contains(self.point(mid)) {
                out.push(self.ids[mid]);
            }
            let next = (axis + 1) % self.d;
            let (a, b) = q.bounds()[axis];
            if a <= split {
                stack.push((lo, mid, next));
            }
            if b >= split {
                stack.push((mid + 1, hi, next));
            }
        }
        Ok((QueryResult::new(out), examined))
    }
}
