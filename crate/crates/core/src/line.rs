//! The mapping line and the k-vector count table built against it.
//!
//! A line `i = m·z + q` maps values to grid positions. Grid point `i` sits at
//! `z(i) = i/m − q/m`, and the k-vector stores, for every grid point, how many
//! values of a sorted run are strictly smaller than `z(i)`. Every routine that
//! needs a grid value goes through [`LineParams::grid_value`], so the counts
//! stored at build time and the windows computed at query time agree bit for
//! bit.

use crate::error::{Error, Result};

/// Slope and intercept of one mapping line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams {
    pub m: f64,
    pub q: f64,
}

impl LineParams {
    pub fn new(m: f64, q: f64) -> Self {
        Self { m, q }
    }

    /// Value-space location of grid point `i`.
    #[inline]
    pub fn grid_value(&self, i: usize) -> f64 {
        i as f64 / self.m - self.q / self.m
    }

    /// Fractional grid position of value `v`.
    #[inline]
    pub fn position(&self, v: f64) -> f64 {
        self.m * v + self.q
    }
}

/// Rounding guard: `(n_k − 1)·ε`, scaled by the magnitude of the data.
pub fn rounding_guard(lo: f64, hi: f64, n_k: usize) -> f64 {
    let scale = 1f64.max(lo.abs()).max(hi.abs());
    (n_k - 1) as f64 * f64::EPSILON * scale
}

/// Fits the line through `(0, lo − g)` and `(n_k − 1, hi + g)`.
///
/// The guard `g` starts at [`rounding_guard`] and is doubled until the grid
/// endpoints strictly bracket `[lo, hi]` after rounding. Returns
/// [`Error::DegenerateDimension`] when `hi − lo` is within twice the guard;
/// callers fall back to [`constant_line`].
pub fn build_mapping_line(lo: f64, hi: f64, n_k: usize) -> Result<LineParams> {
    if n_k < 2 {
        return Err(Error::GridTooSmall(n_k));
    }
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "mapping line needs finite lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut guard = rounding_guard(lo, hi, n_k);
    if hi - lo <= 2.0 * guard {
        return Err(Error::DegenerateDimension { lo, hi });
    }
    let last = n_k - 1;
    loop {
        let span = hi - lo + 2.0 * guard;
        let m = last as f64 / span;
        let q = -m * (lo - guard);
        if !span.is_finite() || !m.is_finite() || !q.is_finite() || m <= 0.0 {
            return Err(Error::RangeOverflow { lo, hi });
        }
        let line = LineParams { m, q };
        if line.grid_value(0) < lo && line.grid_value(last) > hi {
            return Ok(line);
        }
        guard *= 2.0;
    }
}

/// Line for a (near-)constant run: every interior grid point lies at or below
/// `lo`, and only the last one exceeds `hi`. The k-vector is then
/// `[start, .., start, start + len]`.
pub fn constant_line(lo: f64, hi: f64, n_k: usize) -> Result<LineParams> {
    if n_k < 2 {
        return Err(Error::GridTooSmall(n_k));
    }
    let scale = 1f64.max(lo.abs()).max(hi.abs());
    let mut step = (8.0 * rounding_guard(lo, hi, n_k)).max(scale * 2f64.powi(-26));
    let last = n_k - 1;
    loop {
        let z0 = lo - (last as f64 - 0.5) * step;
        let m = 1.0 / step;
        let q = -m * z0;
        if !m.is_finite() || !q.is_finite() {
            return Err(Error::RangeOverflow { lo, hi });
        }
        let line = LineParams { m, q };
        let below = n_k < 3 || line.grid_value(last - 1) <= lo;
        if below && line.grid_value(0) < lo && line.grid_value(last) > hi {
            return Ok(line);
        }
        step *= 2.0;
    }
}

/// [`build_mapping_line`] with the constant-column fallback.
pub fn fit_line(lo: f64, hi: f64, n_k: usize) -> Result<LineParams> {
    match build_mapping_line(lo, hi, n_k) {
        Err(Error::DegenerateDimension { .. }) => constant_line(lo, hi, n_k),
        other => other,
    }
}

/// Strict-less counts of `sorted` at every grid point, offset by `start`.
/// One merge pass over values and grid.
pub fn build_kvector_array(
    sorted: &[f64],
    line: &LineParams,
    n_k: usize,
    start: usize,
) -> Vec<usize> {
    let mut k = Vec::with_capacity(n_k);
    let mut count = 0;
    for i in 0..n_k {
        let z = line.grid_value(i);
        while count < sorted.len() && sorted[count] < z {
            count += 1;
        }
        k.push(start + count);
    }
    debug_assert_eq!(k[0], start);
    debug_assert_eq!(k[n_k - 1], start + sorted.len());
    k
}

/// Grid indexes bracketing a query interval.
///
/// `lower` is the last grid point at or below `a` and `upper` the first one
/// above `b` (both clamped to the grid), so `k[lower]..k[upper]` always
/// contains every value in `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowBounds {
    pub lower: usize,
    pub upper: usize,
    /// The interval misses the line's span entirely.
    pub empty: bool,
}

#[inline]
fn clamp_index(x: f64, last: usize) -> usize {
    // NaN cannot reach here: a, b, m and q are all finite.
    x.max(0.0).min(last as f64) as usize
}

/// `x.floor()` without a libm call on targets lacking a rounding instruction.
#[inline]
fn floor(x: f64) -> f64 {
    // At or above 2^52 every finite double is already integral.
    if x.abs() < 4_503_599_627_370_496.0 {
        let t = x as i64 as f64;
        if t > x {
            t - 1.0
        } else {
            t
        }
    } else {
        x
    }
}

/// Maps `[a, b]` to grid indexes: `⌊m·a+q⌋` and `⌊m·b+q⌋ + 1`, clamped and
/// then corrected against the exact grid values.
pub fn map_range(line: &LineParams, a: f64, b: f64, n_k: usize) -> WindowBounds {
    let last = n_k - 1;
    let pa = line.position(a);
    let pb = line.position(b);
    // Positions further than this from an integer cannot compare differently
    // against the exact grid values (rounding in `position` and in
    // `grid_value` each stay within a few ulps of these magnitudes).
    let margin = 16.0 * f64::EPSILON * (pa.abs().max(pb.abs()) + line.q.abs() + n_k as f64);
    match (settled(pa, margin), settled(pb, margin)) {
        (Some(fa), Some(fb)) => {
            let lower = clamp_index(fa, last);
            let upper = clamp_index(fb + 1.0, last);
            WindowBounds {
                lower,
                upper,
                empty: upper == 0 || pa > last as f64,
            }
        }
        _ => map_range_exact(line, a, b, last),
    }
}

/// `⌊p⌋` when `p` is more than `margin` away from every integer.
#[inline]
fn settled(p: f64, margin: f64) -> Option<f64> {
    let f = floor(p);
    (p - f > margin && f + 1.0 - p > margin).then_some(f)
}

fn map_range_exact(line: &LineParams, a: f64, b: f64, last: usize) -> WindowBounds {
    let mut lower = clamp_index(floor(line.position(a)), last);
    while lower > 0 && line.grid_value(lower) > a {
        lower -= 1;
    }
    while lower < last && line.grid_value(lower + 1) <= a {
        lower += 1;
    }
    let mut upper = clamp_index(floor(line.position(b)) + 1.0, last);
    while upper < last && line.grid_value(upper) <= b {
        upper += 1;
    }
    while upper > 0 && line.grid_value(upper - 1) > b {
        upper -= 1;
    }
    // After the corrections `upper == 0` exactly when `b < z(0)`, and
    // `lower == last` exactly when `z(last) <= a`.
    let empty = upper == 0 || (lower == last && a > line.grid_value(last));
    WindowBounds {
        lower,
        upper,
        empty,
    }
}
