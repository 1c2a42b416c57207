//! Optimal staircase additive noise for ε-differentially-private vector
//! queries under ℓp norms.
//!
//! The crate is organised around the staircase density, whose radial profile
//! is piecewise constant with plateaus `a(γ)e^{-kε}` and breakpoints at
//! `(k + γ)Δ`:
//!
//! - [`norms`]: ℓp norms, ball volumes and cone-measure direction sampling.
//! - [`staircase`]: band tables, exact density evaluation and the two-stage
//!   sampler.
//! - [`cost`]: norm-monotone costs and their expectations (series and Monte
//!   Carlo).
//! - [`optimize`]: the γ* search, Laplace baselines and tradeoff sweeps.
//! - [`profile`]: right-open radial step profiles shared by the verification
//!   and rearrangement code.
//! - [`dpverify`]: decision procedures for the ε-DP characterisations.
//! - [`rearrange`]: rearrangements, maximal-decay modifications, stochastic
//!   domination and staircase mixture decomposition.
//! - [`cli`]: the `staircase-dp` command-line front end.

pub mod cli;
pub mod cost;
pub mod dpverify;
pub mod error;
pub mod nnls;
pub mod norms;
pub mod optimize;
pub mod profile;
pub mod rearrange;
pub mod rng;
pub mod series;
pub mod staircase;

pub use cost::CostSpec;
pub use error::{Error, Result};
pub use norms::NormSpec;
pub use profile::{ProfileTail, RadialProfile};
pub use staircase::{Band, BandTable, Plateau, StaircaseParams};
