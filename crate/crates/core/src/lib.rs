//! Discrete-time coined quantum walk on the line, its matrix-valued Wigner
//! function, and the scalar diagnostics built on top of it (Wigner
//! negativity and coin–walker entanglement entropy).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the FFT
//! accelerated transform and the command line live in the `qwigner` crate.
//!
//! Two independent routes produce the Wigner field at time `t`:
//!
//! * evolve the amplitudes with [`walk::evolve`] and transform with
//!   [`wigner::wigner_from_state`];
//! * transform the initial state once and advance it in phase space with
//!   [`wigner::wigner_step`].
//!
//! They agree to rounding error, and the test-suites lean on that.
#![no_std]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod walk;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::{KGrid, PhaseSpaceGrid};
pub use linalg::{EigenPair2, HermitianMatrix2, Mat2};
pub use num_complex::Complex64 as C64;
pub use observables::{
    coin_density, entanglement_entropy, entropy_series, herm2_eigenvalues, negativity,
    negativity_series, CoinDensityMatrix, EvolutionMethod, NegativityAccumulator,
};
pub use walk::{
    cat_state, coin_matrix, evolve, localized_state, position_distribution, position_sigma, step,
    CoinOperator, InitialStateSpec, WalkState,
};
pub use wigner::{
    momentum_amplitudes, momentum_matrix, position_marginal, wigner_from_state, wigner_step,
    DirectTransform, FieldEvolver, WignerField, WignerTransform,
};
