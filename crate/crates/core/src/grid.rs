//! Phase-space sampling: a lattice window in `n` and a midpoint grid in `k`.

use core::f64::consts::PI;
use core::ops::Range;

use crate::error::{invalid, Result};

const EDGE_TOL: f64 = 1e-9;

/// Uniform midpoint grid `k_j = min + (j + 1/2)·(max − min)/count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    count: usize,
    min: f64,
    max: f64,
}

impl KGrid {
    pub fn new(count: usize, min: f64, max: f64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("k grid needs at least one point"));
        }
        if !min.is_finite() || !max.is_finite() || max <= min {
            return Err(invalid("k grid range must be finite with max > min"));
        }
        Ok(KGrid { count, min, max })
    }

    /// `count` points over the Brillouin zone `[−π, π)`.
    pub fn full_period(count: usize) -> Result<Self> {
        KGrid::new(count, -PI, PI)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Cell width, which is also the midpoint quadrature weight.
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.count as f64
    }

    pub fn k(&self, j: usize) -> f64 {
        self.min + (j as f64 + 0.5) * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.k(j))
    }

    pub fn is_full_period(&self) -> bool {
        libm::fabs(self.max - self.min - 2.0 * PI) < EDGE_TOL
    }

    /// Indices of the cells that exactly tile `[lo, hi)`.
    ///
    /// Fails when `lo` or `hi` does not fall on a cell edge, because the
    /// midpoint rule would then silently integrate over the wrong interval.
    pub fn cells_tiling(&self, lo: f64, hi: f64) -> Result<Range<usize>> {
        let h = self.spacing();
        let first = (lo - self.min) / h;
        let last = (hi - self.min) / h;
        let (fi, li) = (libm::round(first), libm::round(last));
        if libm::fabs(first - fi) > EDGE_TOL * self.count as f64
            || libm::fabs(last - li) > EDGE_TOL * self.count as f64
            || fi < 0.0
            || li > self.count as f64
            || li <= fi
        {
            return Err(invalid(alloc::format!(
                "k grid with {} points on [{}, {}) does not tile [{}, {})",
                self.count,
                self.min,
                self.max,
                lo,
                hi
            )));
        }
        Ok(fi as usize..li as usize)
    }
}

/// Lattice window `[n_min, n_max]` (inclusive) crossed with a [`KGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    n_min: i64,
    n_max: i64,
    k: KGrid,
}

impl PhaseSpaceGrid {
    pub fn new(n_min: i64, n_max: i64, k: KGrid) -> Result<Self> {
        if n_max < n_min {
            return Err(invalid("lattice window must have n_max >= n_min"));
        }
        Ok(PhaseSpaceGrid { n_min, n_max, k })
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn n_count(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn k_grid(&self) -> &KGrid {
        &self.k
    }

    pub fn contains_n(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    pub fn with_window(&self, n_min: i64, n_max: i64) -> Result<Self> {
        PhaseSpaceGrid::new(n_min, n_max, self.k)
    }
}

/// Default number of k points for runs up to `t_max` steps.
pub fn default_k_count(t_max: u64) -> usize {
    core::cmp::max(512, 8 * (t_max as usize + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoints_are_cell_centres() {
        let g = KGrid::full_period(4).unwrap();
        let ks: alloc::vec::Vec<f64> = g.points().collect();
        let expect = [-3.0 * PI / 4.0, -PI / 4.0, PI / 4.0, 3.0 * PI / 4.0];
        for (k, e) in ks.iter().zip(expect) {
            assert!((k - e).abs() < 1e-15);
        }
    }

    #[test]
    fn half_range_tiling() {
        let g = KGrid::full_period(512).unwrap();
        assert_eq!(g.cells_tiling(-PI / 2.0, PI / 2.0).unwrap(), 128..384);
        let odd = KGrid::full_period(10).unwrap();
        assert!(odd.cells_tiling(-PI / 2.0, PI / 2.0).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(KGrid::new(0, -1.0, 1.0).is_err());
        assert!(KGrid::new(4, 1.0, 1.0).is_err());
        assert!(KGrid::new(4, f64::NAN, 1.0).is_err());
        assert!(PhaseSpaceGrid::new(3, 2, KGrid::full_period(4).unwrap()).is_err());
    }

    #[test]
    fn default_k_count_grows_with_time() {
        assert_eq!(default_k_count(0), 512);
        assert_eq!(default_k_count(500), 4008);
    }
}
