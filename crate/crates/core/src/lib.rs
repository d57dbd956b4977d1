//! Classical simulation of two adiabatic-inspired quantum algorithms for
//! linear systems `A x = b`.
//!
//! Both algorithms walk an interpolating Hamiltonian from an easy starting
//! point to one whose zero-energy eigenstate encodes `x ∝ A⁻¹b`, applying at
//! each grid point a fixed Hamiltonian for a random duration (the
//! randomization method). The crate provides every piece needed to reproduce
//! and check that procedure numerically:
//!
//! * [`pauli`]: parsing `(3III+XII-2XYI+3XYZ)/4`-style expressions into dense
//!   matrices;
//! * [`linalg`]: the dense Hermitian toolkit (eigendecomposition, `e^{-iHt}`,
//!   partial trace, post-selection);
//! * [`schedule`]: the κ-dependent natural schedule `s(v)` and gap bound;
//! * [`hamiltonian`]: `H(s)`, the gap-amplified `H′(s)`, instances and
//!   ground spaces;
//! * [`evolve`]: stochastic trajectories, the exact averaged channel, and
//!   solution read-out;
//! * [`experiment`]: JSON configs, shipped presets, multi-seed orchestration
//!   and CSV/JSON artifacts.
//!
//! ```
//! use aqc_linsolve::experiment::{preset, build_instance};
//! use aqc_linsolve::evolve::oracle_solve;
//!
//! let cfg = preset("alg2_paper").unwrap();
//! let inst = build_instance(&cfg).unwrap();
//! let x = oracle_solve(&inst).unwrap();
//! assert_eq!(x.len(), 4);
//! ```

pub mod error;
pub mod evolve;
pub mod experiment;
pub mod hamiltonian;
pub mod linalg;
pub mod pauli;
pub mod schedule;

pub use error::{Error, Result};

// Book chapters are compiled and run as doctests so the guide cannot drift
// from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/pauli.md")]
    pub struct Pauli;
    #[doc = include_str!("../../../book/src/linalg.md")]
    pub struct Linalg;
    #[doc = include_str!("../../../book/src/schedule.md")]
    pub struct Schedule;
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    pub struct Hamiltonians;
    #[doc = include_str!("../../../book/src/evolution.md")]
    pub struct Evolution;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
