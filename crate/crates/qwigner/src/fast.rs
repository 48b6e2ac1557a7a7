//! FFT evaluation of the Wigner transform.
//!
//! On a full-period midpoint grid `k_j = k_0 + 2πj/K`, the row sum
//! `Σ_l c_l e^{−2ik_j l}` is a length-`K` DFT of the sequence that places
//! `c_l e^{−2ik_0 l}` at index `2l mod K`. Each row costs three FFTs
//! instead of `O(L·K)` complex exponentials, and rows are independent, so
//! they are spread over the rayon pool.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use qwigner_core::wigner::{direct_row, pair_products, PairProducts, WignerTransform};
use qwigner_core::{HermitianMatrix2, KGrid, PhaseSpaceGrid, WalkState, WignerField};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Accelerated [`WignerTransform`]. Falls back to the direct sum when the
/// k grid does not span a full period.
#[derive(Debug, Clone, Copy, Default)]
pub struct FftTransform;

struct RowPlan {
    fft: Arc<dyn Fft<f64>>,
    k: KGrid,
    /// The DFT shortcut needs `k_{j+1} − k_j = 2π/K`.
    full_period: bool,
}

impl RowPlan {
    fn new(k: &KGrid) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(k.count());
        RowPlan { fft, k: *k, full_period: k.is_full_period() }
    }

    fn eval(&self, products: &PairProducts, n: i64, out: &mut [HermitianMatrix2], bufs: &mut RowBuffers) {
        if products.is_empty() {
            out.fill(HermitianMatrix2::ZERO);
            return;
        }
        if !self.full_period {
            direct_row(products, n, &self.k, out);
            return;
        }
        let kc = self.k.count();
        let k0 = self.k.k(0);
        bufs.reset(kc);
        for (i, l) in (products.l_start..).take(products.len()).enumerate() {
            let m = (2 * l).rem_euclid(kc as i64) as usize;
            let ph = C64::from_polar(1.0, -2.0 * k0 * l as f64);
            bufs.rr[m] += products.rr[i] * ph;
            bufs.ll[m] += products.ll[i] * ph;
            bufs.rl[m] += products.rl[i] * ph;
        }
        self.fft.process_with_scratch(&mut bufs.rr, &mut bufs.scratch);
        self.fft.process_with_scratch(&mut bufs.ll, &mut bufs.scratch);
        self.fft.process_with_scratch(&mut bufs.rl, &mut bufs.scratch);
        for (j, slot) in out.iter_mut().enumerate() {
            let pre = C64::from_polar(1.0 / PI, self.k.k(j) * n as f64);
            *slot = HermitianMatrix2::new(
                (bufs.rr[j] * pre).re,
                (bufs.ll[j] * pre).re,
                bufs.rl[j] * pre,
            );
        }
    }
}

#[derive(Default)]
struct RowBuffers {
    rr: Vec<C64>,
    ll: Vec<C64>,
    rl: Vec<C64>,
    scratch: Vec<C64>,
}

impl RowBuffers {
    fn reset(&mut self, k: usize) {
        for v in [&mut self.rr, &mut self.ll, &mut self.rl] {
            v.clear();
            v.resize(k, ZERO);
        }
        if self.scratch.len() < k {
            self.scratch.resize(k, ZERO);
        }
    }
}

fn check_window(state: &WalkState, grid: &PhaseSpaceGrid) -> qwigner_core::Result<(i64, i64)> {
    let support = state
        .support()
        .ok_or_else(|| qwigner_core::Error::InvalidArgument("state has no support".into()))?;
    if !grid.contains_n(2 * support.0) || !grid.contains_n(2 * support.1) {
        return Err(qwigner_core::Error::InvalidArgument(format!(
            "grid window [{}, {}] does not cover the doubled state support [{}, {}]",
            grid.n_min(),
            grid.n_max(),
            2 * support.0,
            2 * support.1
        )));
    }
    Ok(support)
}

impl WignerTransform for FftTransform {
    fn transform(&self, state: &WalkState, grid: &PhaseSpaceGrid) -> qwigner_core::Result<WignerField> {
        let support = check_window(state, grid)?;
        let plan = RowPlan::new(grid.k_grid());
        let kc = grid.k_grid().count();
        let n_min = grid.n_min();
        let mut values = vec![HermitianMatrix2::ZERO; grid.n_count() * kc];
        values
            .par_chunks_mut(kc)
            .enumerate()
            .for_each_init(RowBuffers::default, |bufs, (i, row)| {
                let n = n_min + i as i64;
                if n < 2 * support.0 || n > 2 * support.1 {
                    return;
                }
                plan.eval(&pair_products(state, support, n), n, row, bufs);
            });
        WignerField::from_values(*grid, state.t(), values)
    }
}

impl FftTransform {
    /// Streams the rows `n ∈ [2lo, 2hi]` of the field of `state` to `sink`
    /// in ascending order, where `[lo, hi]` is the state's support. Rows are
    /// computed `chunk` at a time in parallel, so memory stays bounded by
    /// `chunk·K` matrices however large the field is. With `even_only` the
    /// odd rows are skipped entirely.
    pub fn for_each_row<E>(
        &self,
        state: &WalkState,
        k: &KGrid,
        chunk: usize,
        even_only: bool,
        mut sink: impl FnMut(i64, &[HermitianMatrix2]) -> Result<(), E>,
    ) -> Result<(), E> {
        let Some((lo, hi)) = state.support() else {
            return Ok(());
        };
        let plan = RowPlan::new(k);
        let kc = k.count();
        let rows: Vec<i64> = (2 * lo..=2 * hi)
            .filter(|n| !even_only || n.rem_euclid(2) == 0)
            .collect();
        let mut buf = vec![HermitianMatrix2::ZERO; chunk.max(1) * kc];
        for ns in rows.chunks(chunk.max(1)) {
            let out = &mut buf[..ns.len() * kc];
            out.par_chunks_mut(kc)
                .zip(ns.par_iter())
                .for_each_init(RowBuffers::default, |bufs, (row, &n)| {
                    plan.eval(&pair_products(state, (lo, hi), n), n, row, bufs);
                });
            for (row, &n) in out.chunks(kc).zip(ns) {
                sink(n, row)?;
            }
        }
        Ok(())
    }
}
