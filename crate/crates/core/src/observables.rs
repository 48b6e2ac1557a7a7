//! Negativity of the Wigner field and coin–walker entanglement entropy.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::grid::{KGrid, PhaseSpaceGrid};
use crate::linalg::HermitianMatrix2;
pub use crate::linalg::{herm2_eigenvalues, EigenPair2};
use crate::walk::{for_each_step, CoinOperator, InitialStateSpec, WalkState};
use crate::wigner::{field_grid_for, FieldEvolver, WignerField, WignerTransform};

/// Largest tolerated departure of `Σ_n ∫ Tr W dk` from one.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Largest eigenvalue excursion outside `[0, 1]` absorbed by clamping.
pub const EIGEN_CLAMP_TOL: f64 = 1e-10;

/// Running sums for the negativity, fed one lattice row at a time so that
/// fields too large to hold in memory can still be reduced.
#[derive(Debug, Clone)]
pub struct NegativityAccumulator {
    cells: Range<usize>,
    dk: f64,
    negative: f64,
    trace: f64,
}

impl NegativityAccumulator {
    /// Integrates over the cells of `k` tiling `[−π/2, π/2)`.
    pub fn new(k: &KGrid) -> Result<Self> {
        Ok(NegativityAccumulator {
            cells: k.cells_tiling(-FRAC_PI_2, FRAC_PI_2)?,
            dk: k.spacing(),
            negative: 0.0,
            trace: 0.0,
        })
    }

    pub fn add_row(&mut self, row: &[HermitianMatrix2]) {
        let (mut neg, mut tr) = (0.0, 0.0);
        for v in &row[self.cells.clone()] {
            let e = herm2_eigenvalues(v);
            neg += e.trace_norm() - e.lambda1 - e.lambda2;
            tr += v.trace();
        }
        self.negative += neg * self.dk;
        self.trace += tr * self.dk;
    }

    /// `Σ_n ∫ Tr W dk` over the rows seen so far.
    pub fn normalization(&self) -> f64 {
        self.trace
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn finish(&self) -> Result<f64> {
        if !(libm::fabs(self.trace - 1.0) <= NORMALIZATION_TOL) {
            return Err(Error::InconsistentField { normalization: self.trace });
        }
        Ok(self.negative)
    }
}

/// `δ(W) = Σ_n ∫_{−π/2}^{π/2} (|λ1| + |λ2| − λ1 − λ2) dk`.
pub fn negativity(field: &WignerField) -> Result<f64> {
    let mut acc = NegativityAccumulator::new(field.grid().k_grid())?;
    for (_, row) in field.rows() {
        acc.add_row(row);
    }
    acc.finish()
}

/// Which route produces the field at every time of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionMethod {
    /// Evolve the amplitudes and transform at each time.
    Amplitude,
    /// Transform once and advance the field in phase space.
    #[default]
    Recursion,
}

/// Negativity at `t = 0, …, t_max` on a full-period grid of `k_count`
/// points. `transform` builds the field(s) from walk states.
pub fn negativity_series(
    initial: &InitialStateSpec,
    coin: &CoinOperator,
    t_max: u64,
    k_count: usize,
    method: EvolutionMethod,
    transform: &dyn WignerTransform,
) -> Result<Vec<(u64, f64)>> {
    let k = KGrid::full_period(k_count)?;
    let state = initial.build(initial.window_for(t_max))?;
    let grid = field_grid_for(&state, k);
    let mut out = Vec::with_capacity(t_max as usize + 1);
    match method {
        EvolutionMethod::Recursion => {
            let mut ev = FieldEvolver::new(transform.transform(&state, &grid)?);
            out.push((0, negativity(ev.field())?));
            for t in 1..=t_max {
                ev.advance(coin);
                out.push((t, negativity(ev.field())?));
            }
        }
        EvolutionMethod::Amplitude => {
            for_each_step(&state, coin, t_max, |s| {
                let field = transform.transform(s, &grid)?;
                out.push((s.t(), negativity(&field)?));
                Ok(())
            })?;
        }
    }
    Ok(out)
}

/// Reduced density matrix of the coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinDensityMatrix(pub HermitianMatrix2);

impl CoinDensityMatrix {
    pub fn matrix(&self) -> &HermitianMatrix2 {
        &self.0
    }

    pub fn eigenvalues(&self) -> EigenPair2 {
        herm2_eigenvalues(&self.0)
    }
}

/// `ρ_c = Σ_n ψ(n) ψ(n)†`, tracing out position.
pub fn coin_density(state: &WalkState) -> CoinDensityMatrix {
    let mut rho = HermitianMatrix2::ZERO;
    for (a, b) in state.a().iter().zip(state.b()) {
        rho.rr += a.norm_sqr();
        rho.ll += b.norm_sqr();
        rho.rl += a * b.conj();
    }
    CoinDensityMatrix(rho)
}

/// Von Neumann entropy (base 2) of the coin, `0·log 0 = 0`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn entanglement_entropy(state: &WalkState) -> Result<f64> {
    let e = coin_density(state).eigenvalues();
    let mut s = 0.0;
    for lambda in [e.lambda1, e.lambda2] {
        let clamped = lambda.clamp(0.0, 1.0);
        if !(libm::fabs(clamped - lambda) < EIGEN_CLAMP_TOL) {
            return Err(Error::EigenvalueOutOfRange { value: lambda });
        }
        if clamped > 0.0 {
            s -= clamped * libm::log2(clamped);
        }
    }
    Ok(s)
}

/// Entropy at `t = 0, …, t_max` by amplitude evolution.
pub fn entropy_series(
    initial: &InitialStateSpec,
    coin: &CoinOperator,
    t_max: u64,
) -> Result<Vec<(u64, f64)>> {
    let state = initial.build(initial.window_for(t_max))?;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    for_each_step(&state, coin, t_max, |s| {
        out.push((s.t(), entanglement_entropy(s)?));
        Ok(())
    })?;
    Ok(out)
}

/// Grid of a fresh field for `initial` that never has to grow over `t_max`
/// steps.
pub fn series_grid(initial: &InitialStateSpec, t_max: u64, k: KGrid) -> Result<PhaseSpaceGrid> {
    let w = initial.window_for(t_max) as i64;
    PhaseSpaceGrid::new(-2 * w, 2 * w, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{coin_matrix, evolve, localized_state};
    use crate::wigner::DirectTransform;
    use core::f64::consts::{FRAC_PI_4, PI};
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn field_of(state: &WalkState, k_count: usize) -> WignerField {
        let grid = field_grid_for(state, KGrid::full_period(k_count).unwrap());
        crate::wigner::wigner_from_state(state, &grid).unwrap()
    }

    #[test]
    fn localized_negativity_is_zero() {
        let s = InitialStateSpec::symmetric_localized().build(1).unwrap();
        assert!(negativity(&field_of(&s, 512)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cat_negativity_is_one() {
        for a in [1, 4, 30] {
            let s = InitialStateSpec::cat(a).build(a as u64 + 1).unwrap();
            let d = negativity(&field_of(&s, 512)).unwrap();
            assert!((d - 1.0).abs() < 1e-12, "a={a}: {d}");
        }
    }

    #[test]
    fn positive_field_has_no_negativity() {
        let grid = PhaseSpaceGrid::new(0, 0, KGrid::full_period(8).unwrap()).unwrap();
        let v = HermitianMatrix2::new(0.2, 0.3, c(0.1, 0.05)).scale(1.0 / (0.5 * PI));
        let f = WignerField::from_values(grid, 0, alloc::vec![v; 8]).unwrap();
        assert_eq!(negativity(&f).unwrap(), 0.0);
    }

    #[test]
    fn unnormalized_field_is_rejected() {
        let grid = PhaseSpaceGrid::new(0, 0, KGrid::full_period(8).unwrap()).unwrap();
        let f = WignerField::zeros(grid, 0);
        assert!(matches!(negativity(&f), Err(Error::InconsistentField { .. })));
        let s = localized_state([c(1.0, 0.0), c(0.0, 0.0)], 1).unwrap();
        let odd = KGrid::full_period(10).unwrap();
        let f = crate::wigner::wigner_from_state(&s, &field_grid_for(&s, odd)).unwrap();
        assert!(matches!(negativity(&f), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mixed_parity_state_is_rejected() {
        // support on two neighbouring sites puts weight on odd rows
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let s = WalkState::from_amplitudes(0, alloc::vec![c(h, 0.0), c(h, 0.0)], alloc::vec![c(0.0, 0.0); 2]).unwrap();
        assert!(matches!(negativity(&field_of(&s, 64)), Err(Error::InconsistentField { .. })));
    }

    #[test]
    fn series_routes_agree() {
        let coin = coin_matrix(FRAC_PI_4).unwrap();
        for init in [InitialStateSpec::symmetric_localized(), InitialStateSpec::cat(3)] {
            let rec = negativity_series(&init, &coin, 12, 128, EvolutionMethod::Recursion, &DirectTransform).unwrap();
            let amp = negativity_series(&init, &coin, 12, 128, EvolutionMethod::Amplitude, &DirectTransform).unwrap();
            assert_eq!(rec.len(), 13);
            for ((t1, d1), (t2, d2)) in rec.iter().zip(&amp) {
                assert_eq!(t1, t2);
                assert!((d1 - d2).abs() < 1e-10);
                assert!(*d1 >= -1e-9);
            }
        }
    }

    #[test]
    fn coin_density_examples() {
        let s = InitialStateSpec::symmetric_localized().build(1).unwrap();
        let rho = coin_density(&s).0;
        assert!(rho.max_abs_diff(&HermitianMatrix2::new(0.5, 0.5, c(0.0, -0.5))) < 1e-15);
        let cat = coin_density(&InitialStateSpec::cat(5).build(6).unwrap()).0;
        assert!(cat.max_abs_diff(&HermitianMatrix2::new(0.5, 0.5, c(0.0, 0.0))) < 1e-15);
        let r = coin_density(&localized_state([c(1.0, 0.0), c(0.0, 0.0)], 1).unwrap()).0;
        assert_eq!(r, HermitianMatrix2::new(1.0, 0.0, c(0.0, 0.0)));
    }

    #[test]
    fn entropy_examples() {
        let s = InitialStateSpec::symmetric_localized().build(1).unwrap();
        assert!(entanglement_entropy(&s).unwrap().abs() < 1e-12);
        let cat = InitialStateSpec::cat(7).build(8).unwrap();
        assert!((entanglement_entropy(&cat).unwrap() - 1.0).abs() < 1e-12);
        // a uniform spinor factor over several sites is still a product state
        let h = 0.5;
        let prod = WalkState::from_amplitudes(
            0,
            alloc::vec![c(h * 0.6, 0.0), c(h * 0.6, 0.0), c(0.0, h * 0.6), c(h * 0.6, 0.0)],
            alloc::vec![c(h * 0.8, 0.0), c(h * 0.8, 0.0), c(0.0, h * 0.8), c(h * 0.8, 0.0)],
        )
        .unwrap();
        assert!(entanglement_entropy(&prod).unwrap().abs() < 1e-7);
    }

    #[test]
    fn entropy_bounded_along_walk() {
        let coin = coin_matrix(FRAC_PI_4).unwrap();
        for init in [InitialStateSpec::symmetric_localized(), InitialStateSpec::cat(4)] {
            for (_, s) in entropy_series(&init, &coin, 100).unwrap() {
                assert!((0.0..=1.0 + 1e-10).contains(&s));
            }
        }
    }

    #[test]
    fn entropy_is_coin_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coin = coin_matrix(FRAC_PI_4).unwrap();
        for _ in 0..20 {
            let t = rng.random_range(1..60);
            let s = evolve(&InitialStateSpec::cat(rng.random_range(0..6)).build(8).unwrap(), &coin, t);
            // random SU(2) element
            let (x, p, q) = (rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
            let (u, v) = (C64::from_polar(libm::cos(x), p), C64::from_polar(libm::sin(x), q));
            let (a, b): (alloc::vec::Vec<C64>, alloc::vec::Vec<C64>) = s
                .a()
                .iter()
                .zip(s.b())
                .map(|(r, l)| (u * r - v.conj() * l, v * r + u.conj() * l))
                .unzip();
            let rotated = WalkState::from_amplitudes(s.n_min(), a, b).unwrap();
            let diff = entanglement_entropy(&rotated).unwrap() - entanglement_entropy(&s).unwrap();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_identities_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let m = HermitianMatrix2::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            );
            let e = herm2_eigenvalues(&m);
            assert!(e.lambda1 >= e.lambda2);
            assert!((e.lambda1 + e.lambda2 - m.trace()).abs() < 1e-12);
            assert!((e.lambda1 * e.lambda2 - m.determinant()).abs() < 1e-12);
        }
    }
}
