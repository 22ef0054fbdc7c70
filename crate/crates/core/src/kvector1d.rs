//! The one-dimensional k-vector: one ascending array, one mapping line, one
//! count table. No sub-databases and no index array.

use std::ops::Range;

use crate::error::Result;
use crate::line::{build_kvector_array, fit_line, map_range, LineParams, WindowBounds};
use crate::model::Dataset;
use crate::search::{trim_extremes, KWindow, TrimMode, TrimOutcome, TrimPolicy};
use crate::structure::build_structure;

#[derive(Debug, Clone, PartialEq)]
pub struct KVector1D {
    sorted: Vec<f64>,
    perm: Vec<usize>,
    line: LineParams,
    k: Vec<usize>,
}

impl KVector1D {
    pub fn build(values: &[f64], n_k: usize) -> Result<Self> {
        let ds = Dataset::from_flat(1, values.to_vec())?;
        let sdb = build_structure(&ds, 1)?;
        let sorted = sdb.as_flat().to_vec();
        let line = fit_line(sorted[0], sorted[sorted.len() - 1], n_k)?;
        let k = build_kvector_array(&sorted, &line, n_k, 0);
        Ok(Self {
            sorted,
            perm: sdb.perm().to_vec(),
            line,
            k,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Sorted position → original position.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn line(&self) -> &LineParams {
        &self.line
    }

    pub fn kvector(&self) -> &[usize] {
        &self.k
    }

    pub fn n_k(&self) -> usize {
        self.k.len()
    }

    /// Mean elements per grid cell on linearly distributed data.
    pub fn expected_per_cell(&self) -> f64 {
        self.sorted.len() as f64 / self.k.len() as f64
    }

    pub fn window(&self, a: f64, b: f64) -> WindowBounds {
        map_range(&self.line, a, b, self.k.len())
    }

    /// Sorted positions of the values in `[a, b]`.
    pub fn search(&self, a: f64, b: f64) -> Range<usize> {
        self.search_detailed(a, b, TrimPolicy::default()).exact
    }

    /// Search with an explicit trim policy, reporting the untrimmed window and
    /// the comparisons spent trimming it.
    pub fn search_detailed(&self, a: f64, b: f64, policy: TrimPolicy) -> TrimOutcome {
        if a > b {
            return TrimOutcome {
                window: 0..0,
                exact: 0..0,
                comparisons: 0,
                lower_mode: TrimMode::Linear,
                upper_mode: TrimMode::Linear,
            };
        }
        let window = KWindow::from_bounds(&self.k, self.window(a, b));
        if window.count() == 0 {
            let at = window.lower_cell.start;
            return TrimOutcome {
                window: at..at,
                exact: at..at,
                comparisons: 0,
                lower_mode: TrimMode::Linear,
                upper_mode: TrimMode::Linear,
            };
        }
        trim_extremes(
            |i| self.sorted[i],
            &window,
            a,
            b,
            policy,
            self.expected_per_cell(),
        )
    }

    /// Original positions of the values in `[a, b]`.
    pub fn ids(&self, a: f64, b: f64) -> &[usize] {
        &self.perm[self.search(a, b)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_oracle(values: &[f64], line: &LineParams, n_k: usize) -> Vec<usize> {
        (0..n_k)
            .map(|i| values.iter().filter(|&&v| v < line.grid_value(i)).count())
            .collect()
    }

    #[test]
    fn ten_values() {
        let values = [9., 3., 2., 7., 1., 0., 6., 8., 4., 5.];
        let kv = KVector1D::build(&values, 10).unwrap();
        assert_eq!(
            kv.sorted_values(),
            &[0., 1., 2., 3., 4., 5., 6., 7., 8., 9.]
        );
        assert!((kv.line().m - 1.0).abs() < 1e-12);
        assert!(kv.line().q.abs() < 1e-12);
        // Frozen from the brute-force strict-less rank oracle: the guard puts
        // grid points 5..8 a few ulps above the integers, so each counts one
        // more value than the grid index.
        assert_eq!(kv.kvector(), &[0, 1, 2, 3, 4, 6, 7, 8, 9, 10]);
        assert_eq!(kv.kvector(), rank_oracle(&values, kv.line(), 10).as_slice());
    }

    #[test]
    fn single_and_constant() {
        let kv = KVector1D::build(&[4.0], 2).unwrap();
        assert_eq!(kv.kvector(), &[0, 1]);
        assert_eq!(kv.search(4.0, 4.0), 0..1);
        assert_eq!(kv.search(4.5, 5.0), 1..1);

        let kv = KVector1D::build(&[5.0, 5.0, 5.0], 4).unwrap();
        assert_eq!(kv.kvector(), &[0, 0, 0, 3]);
        assert_eq!(kv.search(5.0, 5.0), 0..3);
        assert_eq!(kv.search(4.0, 4.9), 0..0);
        assert!(kv.search(5.1, 6.0).is_empty());
    }

    #[test]
    fn search_examples() {
        let values: Vec<f64> = (0..10).map(f64::from).collect();
        let kv = KVector1D::build(&values, 10).unwrap();
        assert_eq!(kv.search(2.5, 5.5), 3..6);
        assert!(kv.search(-5.0, -1.0).is_empty());
        assert_eq!(kv.search(0.0, 9.0), 0..10);
        assert_eq!(kv.search(3.0, 3.0), 3..4);
    }

    #[test]
    fn ids_follow_original_order() {
        let kv = KVector1D::build(&[3.0, 1.0, 2.0], 3).unwrap();
        assert_eq!(kv.ids(1.5, 3.0), &[2, 0]);
    }

    #[test]
    fn adversarial_cluster_uses_binary_trim() {
        let n = 4097;
        let mut values: Vec<f64> = (0..n - 1).map(|i| i as f64 * 1e-9).collect();
        values.push(1.0);
        let kv = KVector1D::build(&values, 64).unwrap();
        let a = 1000.5e-9;
        let b = 3000.5e-9;
        let auto = kv.search_detailed(a, b, TrimPolicy::default());
        let linear = kv.search_detailed(a, b, TrimPolicy::Linear);
        assert_eq!(auto.exact, 1001..3001);
        assert_eq!(linear.exact, auto.exact);
        assert_eq!(auto.lower_mode, TrimMode::Binary);
        assert!(auto.comparisons <= 2 * 13 + 2);
        assert!(linear.comparisons > 1000);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_brute_force(
                raw in prop::collection::vec(-20i32..20, 1..80),
                scale in prop::sample::select(vec![1.0, 0.25, 1e-3, 1e6]),
                n_k in 2usize..50,
                a in -25i32..25,
                len in 0i32..20,
                policy in prop::sample::select(vec![
                    TrimPolicy::Linear,
                    TrimPolicy::Binary,
                    TrimPolicy::default(),
                ]),
            ) {
                let values: Vec<f64> = raw.iter().map(|&v| f64::from(v) * scale).collect();
                let kv = KVector1D::build(&values, n_k).unwrap();
                let (a, b) = (f64::from(a) * scale, f64::from(a + len) * scale);
                let t = kv.search_detailed(a, b, policy);
                let sorted = kv.sorted_values();
                let lo = sorted.iter().filter(|&&v| v < a).count();
                let hi = sorted.iter().filter(|&&v| v <= b).count();
                prop_assert_eq!(t.exact, lo..hi);
                prop_assert!(t.window.start <= lo && hi <= t.window.end);
            }
        }
    }
}
