//! Walker + coin state and its unitary evolution.
//!
//! One step applies the coin `C(θ) = σz·cosθ + σx·sinθ` at every site and
//! then shifts the right-chirality component one site to the right and the
//! left-chirality component one site to the left.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::linalg::Mat2;

/// Tolerance on the total probability of a stored state.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on the norm of a coin spinor handed to a constructor.
pub const SPINOR_NORM_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);

/// The real symmetric coin `[[cosθ, sinθ], [sinθ, −cosθ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOperator {
    theta: f64,
    cos: f64,
    sin: f64,
}

impl CoinOperator {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::from_real([[self.cos, self.sin], [self.sin, -self.cos]])
    }

    /// `C·(r, l)ᵀ`
    #[inline]
    pub fn apply(&self, r: C64, l: C64) -> (C64, C64) {
        (r * self.cos + l * self.sin, r * self.sin - l * self.cos)
    }
}

pub fn coin_matrix(theta: f64) -> Result<CoinOperator> {
    if !theta.is_finite() {
        return Err(invalid("coin angle must be finite"));
    }
    Ok(CoinOperator { theta, cos: libm::cos(theta), sin: libm::sin(theta) })
}

/// Spinor amplitudes over the lattice window `[n_min, n_min + len)`.
///
/// The outermost site on each side is always empty, so a step can never push
/// probability out of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    n_min: i64,
    a: Vec<C64>,
    b: Vec<C64>,
    t: u64,
}

impl WalkState {
    /// Builds a state from right (`a`) and left (`b`) amplitudes starting at
    /// site `n_min`. An empty site is added on a side whose edge is occupied.
    pub fn from_amplitudes(n_min: i64, a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(invalid("right and left amplitude sequences differ in length"));
        }
        if a.is_empty() {
            return Err(invalid("state needs at least one site"));
        }
        if a.iter().chain(&b).any(|z| !z.is_finite()) {
            return Err(invalid("amplitudes must be finite"));
        }
        let mut state = WalkState { n_min, a, b, t: 0 };
        let norm = state.norm_sqr();
        if libm::fabs(norm - 1.0) > NORM_TOL {
            return Err(invalid(alloc::format!("state norm is {norm}, expected 1")));
        }
        if let Some((lo, hi)) = state.support() {
            let (wlo, whi) = (state.n_min().min(lo - 1), state.n_max().max(hi + 1));
            state.grow_to(wlo, whi);
        }
        Ok(state)
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.a.len() as i64 - 1
    }

    /// Right-chirality amplitudes, index `i` is site `n_min + i`.
    pub fn a(&self) -> &[C64] {
        &self.a
    }

    /// Left-chirality amplitudes.
    pub fn b(&self) -> &[C64] {
        &self.b
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max()
    }

    /// `(a_n, b_n)`, zero outside the window.
    pub fn amplitude(&self, n: i64) -> (C64, C64) {
        match self.index(n) {
            Some(i) => (self.a[i], self.b[i]),
            None => (ZERO, ZERO),
        }
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.n_min;
        (0..self.a.len() as i64).contains(&i).then_some(i as usize)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|z| z.norm_sqr()).sum()
    }

    /// Smallest interval holding every nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let occupied = |i: &usize| self.a[*i] != ZERO || self.b[*i] != ZERO;
        let first = (0..self.a.len()).find(occupied)?;
        let last = (0..self.a.len()).rev().find(occupied)?;
        Some((self.n_min + first as i64, self.n_min + last as i64))
    }

    /// Widens the window to cover `[lo, hi]`; never shrinks it.
    pub fn grow_to(&mut self, lo: i64, hi: i64) {
        let lo = lo.min(self.n_min);
        let hi = hi.max(self.n_max());
        if lo == self.n_min && hi == self.n_max() {
            return;
        }
        let len = (hi - lo + 1) as usize;
        let off = (self.n_min - lo) as usize;
        let mut a = vec![ZERO; len];
        let mut b = vec![ZERO; len];
        a[off..off + self.a.len()].copy_from_slice(&self.a);
        b[off..off + self.b.len()].copy_from_slice(&self.b);
        self.n_min = lo;
        self.a = a;
        self.b = b;
    }

    /// Replaces the amplitudes with `U(θ)` applied to them. The window must
    /// already have an empty site on each edge.
    fn step_in_place(&mut self, coin: &CoinOperator, scratch: &mut (Vec<C64>, Vec<C64>)) {
        let len = self.a.len();
        debug_assert!(self.a[0] == ZERO && self.b[len - 1] == ZERO);
        let (na, nb) = scratch;
        na.clear();
        na.resize(len, ZERO);
        nb.clear();
        nb.resize(len, ZERO);
        for i in 0..len {
            let (r, l) = (self.a[i], self.b[i]);
            if r == ZERO && l == ZERO {
                continue;
            }
            let (cr, cl) = coin.apply(r, l);
            na[i + 1] = cr;
            nb[i - 1] = cl;
        }
        core::mem::swap(&mut self.a, na);
        core::mem::swap(&mut self.b, nb);
        self.t += 1;
    }

    fn ensure_margin(&mut self, margin: i64) {
        if let Some((lo, hi)) = self.support() {
            self.grow_to(lo - margin, hi + margin);
        }
    }
}

/// How a run's initial state is prepared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialStateSpec {
    /// `(c_R |R⟩ + c_L |L⟩) ⊗ |0⟩`
    Localized { coin_spinor: [C64; 2] },
    /// `(|a, R⟩ + i |−a, L⟩)/√2`
    Cat { half_separation: u32 },
}

impl InitialStateSpec {
    pub fn localized(coin_spinor: [C64; 2]) -> Result<Self> {
        check_spinor(&coin_spinor)?;
        Ok(InitialStateSpec::Localized { coin_spinor })
    }

    /// `(|R⟩ + i|L⟩)/√2 ⊗ |0⟩`, the left-right symmetric start.
    pub fn symmetric_localized() -> Self {
        InitialStateSpec::Localized {
            coin_spinor: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)],
        }
    }

    pub fn cat(half_separation: u32) -> Self {
        InitialStateSpec::Cat { half_separation }
    }

    /// Largest `|n|` carrying amplitude at `t = 0`.
    pub fn support_radius(&self) -> u64 {
        match self {
            InitialStateSpec::Localized { .. } => 0,
            InitialStateSpec::Cat { half_separation } => *half_separation as u64,
        }
    }

    /// Window half-width that holds the state for `t_max` steps without
    /// ever growing.
    pub fn window_for(&self, t_max: u64) -> u64 {
        self.support_radius() + t_max + 1
    }

    pub fn build(&self, window_halfwidth: u64) -> Result<WalkState> {
        match *self {
            InitialStateSpec::Localized { coin_spinor } => {
                localized_state(coin_spinor, window_halfwidth)
            }
            InitialStateSpec::Cat { half_separation } => {
                cat_state(half_separation, window_halfwidth)
            }
        }
    }
}

fn check_spinor(s: &[C64; 2]) -> Result<()> {
    let norm = s[0].norm_sqr() + s[1].norm_sqr();
    if !norm.is_finite() || libm::fabs(norm - 1.0) > SPINOR_NORM_TOL {
        return Err(invalid(alloc::format!("coin spinor norm is {norm}, expected 1")));
    }
    Ok(())
}

fn empty_window(halfwidth: u64) -> (i64, Vec<C64>, Vec<C64>) {
    let len = 2 * halfwidth as usize + 1;
    (-(halfwidth as i64), vec![ZERO; len], vec![ZERO; len])
}

pub fn localized_state(coin_spinor: [C64; 2], window_halfwidth: u64) -> Result<WalkState> {
    check_spinor(&coin_spinor)?;
    if window_halfwidth < 1 {
        return Err(invalid("window half-width must be at least 1"));
    }
    let (n_min, mut a, mut b) = empty_window(window_halfwidth);
    let centre = window_halfwidth as usize;
    a[centre] = coin_spinor[0];
    b[centre] = coin_spinor[1];
    Ok(WalkState { n_min, a, b, t: 0 })
}

pub fn cat_state(half_separation: u32, window_halfwidth: u64) -> Result<WalkState> {
    if window_halfwidth <= half_separation as u64 {
        return Err(invalid(alloc::format!(
            "window half-width {window_halfwidth} must exceed the cat half-separation {half_separation}"
        )));
    }
    let (n_min, mut a, mut b) = empty_window(window_halfwidth);
    let centre = window_halfwidth as usize;
    let sep = half_separation as usize;
    a[centre + sep] += C64::new(FRAC_1_SQRT_2, 0.0);
    b[centre - sep] += C64::new(0.0, FRAC_1_SQRT_2);
    Ok(WalkState { n_min, a, b, t: 0 })
}

pub fn step(state: &WalkState, coin: &CoinOperator) -> WalkState {
    let mut next = state.clone();
    next.ensure_margin(2);
    next.step_in_place(coin, &mut (Vec::new(), Vec::new()));
    next
}

pub fn evolve(state: &WalkState, coin: &CoinOperator, steps: u64) -> WalkState {
    let mut s = state.clone();
    if steps == 0 {
        return s;
    }
    s.ensure_margin(steps as i64 + 1);
    let mut scratch = (Vec::with_capacity(s.a.len()), Vec::with_capacity(s.a.len()));
    for _ in 0..steps {
        s.step_in_place(coin, &mut scratch);
    }
    s
}

/// Calls `f` with the state at `t = 0, 1, …, steps`, stepping in place.
pub fn for_each_step(
    state: &WalkState,
    coin: &CoinOperator,
    steps: u64,
    mut f: impl FnMut(&WalkState) -> Result<()>,
) -> Result<()> {
    let mut s = state.clone();
    s.ensure_margin(steps as i64 + 1);
    let mut scratch = (Vec::new(), Vec::new());
    f(&s)?;
    for _ in 0..steps {
        s.step_in_place(coin, &mut scratch);
        f(&s)?;
    }
    Ok(())
}

/// `P(n) = |a_n|² + |b_n|²` for every site with nonzero probability, in
/// ascending `n`.
pub fn position_distribution(state: &WalkState) -> Vec<(i64, f64)> {
    state
        .sites()
        .zip(state.a.iter().zip(&state.b))
        .map(|(n, (r, l))| (n, r.norm_sqr() + l.norm_sqr()))
        .filter(|&(_, p)| p != 0.0)
        .collect()
}

/// Standard deviation of the position distribution.
pub fn position_sigma(state: &WalkState) -> f64 {
    let dist = position_distribution(state);
    let total: f64 = dist.iter().map(|&(_, p)| p).sum();
    let mean = dist.iter().map(|&(n, p)| n as f64 * p).sum::<f64>() / total;
    let var = dist
        .iter()
        .map(|&(n, p)| {
            let d = n as f64 - mean;
            d * d * p
        })
        .sum::<f64>()
        / total;
    libm::sqrt(var.max(0.0))
}
