//! Matrix-valued discrete Wigner function of the walk.
//!
//! For a pure state the value at phase-space point `(n, k)` is
//!
//! ```text
//! W(n, k) = (1/π) e^{ikn} Σ_l ψ(l) ψ(n − l)† e^{−2ikl}
//! ```
//!
//! a Hermitian 2×2 matrix in chirality space. Because the sum couples `l`
//! with `n − l`, a state living on `[lo, hi]` has a field on `[2lo, 2hi]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::grid::{KGrid, PhaseSpaceGrid};
use crate::linalg::HermitianMatrix2;
use crate::walk::{CoinOperator, WalkState};

const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
fn cis(x: f64) -> C64 {
    C64::new(libm::cos(x), libm::sin(x))
}

/// Wigner matrices on a [`PhaseSpaceGrid`], stored row-major by `n` then `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    grid: PhaseSpaceGrid,
    values: Vec<HermitianMatrix2>,
    t: u64,
}

impl WignerField {
    pub fn zeros(grid: PhaseSpaceGrid, t: u64) -> Self {
        let len = grid.n_count() * grid.k_grid().count();
        WignerField { grid, values: vec![HermitianMatrix2::ZERO; len], t }
    }

    /// Wraps precomputed values, e.g. ones read back from a file.
    pub fn from_values(grid: PhaseSpaceGrid, t: u64, values: Vec<HermitianMatrix2>) -> Result<Self> {
        if values.len() != grid.n_count() * grid.k_grid().count() {
            return Err(invalid("value count does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("field values must be finite"));
        }
        Ok(WignerField { grid, values, t })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn values(&self) -> &[HermitianMatrix2] {
        &self.values
    }

    fn k_count(&self) -> usize {
        self.grid.k_grid().count()
    }

    fn row_index(&self, n: i64) -> Option<usize> {
        self.grid.contains_n(n).then(|| (n - self.grid.n_min()) as usize)
    }

    pub fn row(&self, n: i64) -> Option<&[HermitianMatrix2]> {
        let k = self.k_count();
        self.row_index(n).map(|i| &self.values[i * k..(i + 1) * k])
    }

    pub fn row_mut(&mut self, n: i64) -> Option<&mut [HermitianMatrix2]> {
        let k = self.k_count();
        self.row_index(n).map(move |i| &mut self.values[i * k..(i + 1) * k])
    }

    pub fn rows(&self) -> impl DoubleEndedIterator<Item = (i64, &[HermitianMatrix2])> {
        let n_min = self.grid.n_min();
        self.values
            .chunks_exact(self.k_count())
            .enumerate()
            .map(move |(i, row)| (n_min + i as i64, row))
    }

    /// Value at `(n, k_j)`, zero outside the window.
    pub fn get(&self, n: i64, j: usize) -> HermitianMatrix2 {
        self.row(n).map_or(HermitianMatrix2::ZERO, |r| r[j])
    }

    /// Rows holding any nonzero entry, as an inclusive range.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nonzero = |(_, row): &(i64, &[HermitianMatrix2])| row.iter().any(|v| !v.is_zero());
        let lo = self.rows().find(nonzero)?.0;
        let hi = self.rows().rev().find(nonzero)?.0;
        Some((lo, hi))
    }

    /// Widens the lattice window to cover `[lo, hi]`; never shrinks it.
    pub fn grow_to(&mut self, lo: i64, hi: i64) {
        let lo = lo.min(self.grid.n_min());
        let hi = hi.max(self.grid.n_max());
        if lo == self.grid.n_min() && hi == self.grid.n_max() {
            return;
        }
        let grid = self.grid.with_window(lo, hi).expect("window is non-empty");
        let mut grown = WignerField::zeros(grid, self.t);
        let k = self.k_count();
        let off = (self.grid.n_min() - lo) as usize * k;
        grown.values[off..off + self.values.len()].copy_from_slice(&self.values);
        *self = grown;
    }

    /// Largest pointwise deviation from `other`, over the union of both
    /// windows (missing rows count as zero). Both fields must share a k grid.
    pub fn max_abs_diff(&self, other: &WignerField) -> Result<f64> {
        if self.grid.k_grid() != other.grid.k_grid() {
            return Err(invalid("fields are sampled on different k grids"));
        }
        let lo = self.grid.n_min().min(other.grid.n_min());
        let hi = self.grid.n_max().max(other.grid.n_max());
        let zero_row = vec![HermitianMatrix2::ZERO; self.k_count()];
        let mut worst = 0.0f64;
        for n in lo..=hi {
            let a = self.row(n).unwrap_or(&zero_row);
            let b = other.row(n).unwrap_or(&zero_row);
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(x.max_abs_diff(y));
            }
        }
        Ok(worst)
    }

    /// Largest deviation from `W(n, k + π) = (−1)ⁿ W(n, k)`. Needs a full
    /// period grid with an even number of points so that `k + π` is sampled.
    pub fn parity_defect(&self) -> Result<f64> {
        let kg = self.grid.k_grid();
        if !kg.is_full_period() || !kg.count().is_multiple_of(2) {
            return Err(invalid("parity check needs a full-period grid with an even point count"));
        }
        let half = kg.count() / 2;
        let mut worst = 0.0f64;
        for (n, row) in self.rows() {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            for j in 0..half {
                worst = worst.max(row[j + half].max_abs_diff(&row[j].scale(sign)));
            }
        }
        Ok(worst)
    }

    /// `Σ_n ∫_{−π/2}^{π/2} Tr W(n, k) dk` by the midpoint rule.
    pub fn half_range_normalization(&self) -> Result<f64> {
        let cells = self.grid.k_grid().cells_tiling(-FRAC_PI_2, FRAC_PI_2)?;
        let dk = self.grid.k_grid().spacing();
        Ok(self
            .rows()
            .map(|(_, row)| row[cells.clone()].iter().map(|v| v.trace()).sum::<f64>())
            .sum::<f64>()
            * dk)
    }
}

/// Lattice window of the field of `state`: twice the state window.
pub fn field_grid_for(state: &WalkState, k: KGrid) -> PhaseSpaceGrid {
    PhaseSpaceGrid::new(2 * state.n_min(), 2 * state.n_max(), k).expect("state window is non-empty")
}

/// The products `ψ(l) ψ(n − l)†` entering row `n`, for `l = l_start, …`.
#[derive(Debug, Clone, Default)]
pub struct PairProducts {
    pub l_start: i64,
    /// `a_l a*_{n−l}`
    pub rr: Vec<C64>,
    /// `b_l b*_{n−l}`
    pub ll: Vec<C64>,
    /// `a_l b*_{n−l}`
    pub rl: Vec<C64>,
}

impl PairProducts {
    pub fn len(&self) -> usize {
        self.rr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rr.is_empty()
    }
}

/// Collects the pair products of row `n`, restricted to `support`.
pub fn pair_products(state: &WalkState, support: (i64, i64), n: i64) -> PairProducts {
    let (lo, hi) = support;
    let l_start = lo.max(n - hi);
    let l_end = hi.min(n - lo);
    let mut out = PairProducts { l_start, ..Default::default() };
    if l_end < l_start {
        return out;
    }
    let len = (l_end - l_start + 1) as usize;
    out.rr.reserve(len);
    out.ll.reserve(len);
    out.rl.reserve(len);
    for l in l_start..=l_end {
        let (a, b) = state.amplitude(l);
        let (am, bm) = state.amplitude(n - l);
        out.rr.push(a * am.conj());
        out.ll.push(b * bm.conj());
        out.rl.push(a * bm.conj());
    }
    out
}

fn check_window(state: &WalkState, grid: &PhaseSpaceGrid) -> Result<(i64, i64)> {
    let support = state.support().ok_or_else(|| invalid("state has no support"))?;
    if !grid.contains_n(2 * support.0) || !grid.contains_n(2 * support.1) {
        return Err(invalid(alloc::format!(
            "grid window [{}, {}] does not cover the doubled state support [{}, {}]",
            grid.n_min(),
            grid.n_max(),
            2 * support.0,
            2 * support.1
        )));
    }
    Ok(support)
}

/// Builds the Wigner field of a pure walk state.
pub trait WignerTransform {
    fn transform(&self, state: &WalkState, grid: &PhaseSpaceGrid) -> Result<WignerField>;
}

/// Direct evaluation of the defining sum at every grid point, `O(L·K)` per
/// row. This is the reference the accelerated transforms are checked
/// against.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectTransform;

impl WignerTransform for DirectTransform {
    fn transform(&self, state: &WalkState, grid: &PhaseSpaceGrid) -> Result<WignerField> {
        wigner_from_state(state, grid)
    }
}

/// Evaluates row `n` into `out` (one entry per k point) by the direct sum.
pub fn direct_row(products: &PairProducts, n: i64, k: &KGrid, out: &mut [HermitianMatrix2]) {
    for (j, slot) in out.iter_mut().enumerate() {
        let kj = k.k(j);
        let (mut rr, mut ll, mut rl) = (ZERO, ZERO, ZERO);
        for (i, l) in (products.l_start..).take(products.len()).enumerate() {
            let ph = cis(-2.0 * kj * l as f64);
            rr += products.rr[i] * ph;
            ll += products.ll[i] * ph;
            rl += products.rl[i] * ph;
        }
        let pre = cis(kj * n as f64) / PI;
        *slot = HermitianMatrix2::new((rr * pre).re, (ll * pre).re, rl * pre);
    }
}

pub fn wigner_from_state(state: &WalkState, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let support = check_window(state, grid)?;
    let mut field = WignerField::zeros(*grid, state.t());
    let k = *grid.k_grid();
    for n in 2 * support.0..=2 * support.1 {
        let products = pair_products(state, support, n);
        if products.is_empty() {
            continue;
        }
        direct_row(&products, n, &k, field.row_mut(n).expect("row inside window"));
    }
    Ok(field)
}

/// Advances a Wigner field in phase space, one walk step at a time.
///
/// With `M_R = |R⟩⟨R|C` and `M_L = |L⟩⟨L|C` the update is
///
/// ```text
/// W(n, t+1) = M_R W(n−2) M_R† + e^{−2ik} M_R W(n) M_L†
///           + e^{2ik} M_L W(n) M_R† + M_L W(n+2) M_L†
/// ```
///
/// Each projected coin has rank one, `M_R = |R⟩⟨u|` and `M_L = |L⟩⟨v|` with
/// `u = (cosθ, sinθ)` and `v = (sinθ, −cosθ)`, so the four terms reduce to
/// the scalars `uᵀW(n−2)u`, `vᵀW(n+2)v` and `uᵀW(n)v` written straight into
/// the RR, LL and RL entries.
#[derive(Debug, Clone)]
pub struct FieldEvolver {
    field: WignerField,
    scratch: Vec<HermitianMatrix2>,
    /// Rows that may be nonzero in `field`.
    active: Option<(i64, i64)>,
    /// Rows that may be nonzero in `scratch`.
    scratch_dirty: Option<(i64, i64)>,
    /// `e^{−2ik_j}`
    phases: Vec<C64>,
}

impl FieldEvolver {
    pub fn new(field: WignerField) -> Self {
        let phases = field.grid().k_grid().points().map(|k| cis(-2.0 * k)).collect();
        let active = field.support();
        FieldEvolver { scratch: Vec::new(), active, scratch_dirty: None, phases, field }
    }

    pub fn field(&self) -> &WignerField {
        &self.field
    }

    /// Mutable access for tests that tamper with the field; the whole
    /// window is treated as active afterwards.
    pub fn field_mut(&mut self) -> &mut WignerField {
        self.active = Some((self.field.grid().n_min(), self.field.grid().n_max()));
        &mut self.field
    }

    pub fn into_field(self) -> WignerField {
        self.field
    }

    pub fn advance(&mut self, coin: &CoinOperator) {
        let Some((lo, hi)) = self.active else {
            self.field.t += 1;
            return;
        };
        let (out_lo, out_hi) = (lo - 2, hi + 2);
        let grid = *self.field.grid();
        if out_lo - 2 < grid.n_min() || out_hi + 2 > grid.n_max() {
            let pad = core::cmp::max(2, grid.n_count() as i64 / 4);
            self.field.grow_to(out_lo - 2 - pad, out_hi + 2 + pad);
            self.scratch.clear();
            self.scratch_dirty = None;
        }
        let kc = self.field.k_count();
        let n_min = self.field.grid().n_min();
        self.scratch.resize(self.field.values.len(), HermitianMatrix2::ZERO);
        if let Some((dlo, dhi)) = self.scratch_dirty {
            for n in (dlo..=dhi).filter(|n| *n < out_lo || *n > out_hi) {
                let i = (n - n_min) as usize;
                self.scratch[i * kc..(i + 1) * kc].fill(HermitianMatrix2::ZERO);
            }
        }

        let (c, s) = (coin.cos(), coin.sin());
        let (cc, ss, cs) = (c * c, s * s, c * s);
        let zero_row = vec![HermitianMatrix2::ZERO; kc];
        let src = &self.field;
        let row = |n: i64| -> &[HermitianMatrix2] {
            if (lo..=hi).contains(&n) {
                src.row(n).expect("active rows lie inside the window")
            } else {
                &zero_row
            }
        };
        for n in out_lo..=out_hi {
            let (below, here, above) = (row(n - 2), row(n), row(n + 2));
            let i = (n - n_min) as usize;
            let out = &mut self.scratch[i * kc..(i + 1) * kc];
            for j in 0..kc {
                let (w0, w1, w2) = (&below[j], &here[j], &above[j]);
                let rr = cc * w0.rr + ss * w0.ll + 2.0 * cs * w0.rl.re;
                let ll = ss * w2.rr + cc * w2.ll - 2.0 * cs * w2.rl.re;
                let cross = (w1.rr - w1.ll) * cs - w1.rl * cc + w1.rl.conj() * ss;
                out[j] = HermitianMatrix2::new(rr, ll, cross * self.phases[j]);
            }
        }
        core::mem::swap(&mut self.field.values, &mut self.scratch);
        self.scratch_dirty = Some((lo, hi));
        self.active = Some((out_lo, out_hi));
        self.field.t += 1;
    }
}

/// One phase-space step of `field`. The window grows when the field comes
/// within two rows of an edge.
pub fn wigner_step(field: &WignerField, coin: &CoinOperator) -> WignerField {
    let mut ev = FieldEvolver::new(field.clone());
    ev.advance(coin);
    ev.into_field()
}

/// `∫_{−π}^{π} W(n, k) dk` for every row, by the midpoint rule.
pub fn position_marginal(field: &WignerField) -> Result<Vec<(i64, HermitianMatrix2)>> {
    let kg = field.grid().k_grid();
    if !kg.is_full_period() {
        return Err(invalid("position marginal needs a k grid spanning a full period"));
    }
    let dk = kg.spacing();
    Ok(field
        .rows()
        .map(|(n, row)| {
            let sum = row.iter().fold(HermitianMatrix2::ZERO, |acc, v| acc + *v);
            (n, sum.scale(dk))
        })
        .collect())
}

/// `M(k) = Σ_n W(n, k)` at every k point.
pub fn momentum_matrix(field: &WignerField) -> Vec<(f64, HermitianMatrix2)> {
    let kg = *field.grid().k_grid();
    let mut sums = vec![HermitianMatrix2::ZERO; kg.count()];
    for (_, row) in field.rows() {
        for (acc, v) in sums.iter_mut().zip(row) {
            *acc += *v;
        }
    }
    kg.points().zip(sums).collect()
}

/// `ã_k = (2π)^{−1/2} Σ_n e^{−ink} a_n` and likewise `b̃_k`, as `[ã_k, b̃_k]`.
pub fn momentum_amplitudes(state: &WalkState, k: &KGrid) -> Vec<(f64, [C64; 2])> {
    let norm = 1.0 / libm::sqrt(2.0 * PI);
    let support = state.support();
    k.points()
        .map(|kj| {
            let (mut a, mut b) = (ZERO, ZERO);
            if let Some((lo, hi)) = support {
                for n in lo..=hi {
                    let (an, bn) = state.amplitude(n);
                    let ph = cis(-(n as f64) * kj);
                    a += an * ph;
                    b += bn * ph;
                }
            }
            (kj, [a * norm, b * norm])
        })
        .collect()
}
