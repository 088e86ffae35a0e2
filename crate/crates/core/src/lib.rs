//! Simulation and verification toolkit for Burkholder–Davis–Gundy type moment
//! inequalities of stochastic integrals driven by compensated Poisson random
//! measures.
//!
//! The crate is organised bottom-up:
//!
//! - [`convex`]: Young-conjugate pairs `(Φ, φ, Ψ, ψ)` and their growth constants.
//! - [`filtration`]: exact finite filtrations, discrete martingale statistics and
//!   enumeration-based checks of the discrete maximal inequalities.
//! - [`prm`]: Poisson random measures with finite intensity, pure-jump Lévy paths
//!   and characteristic-function checks.
//! - [`integrator`]: stochastic integrals of predictable step integrands against the
//!   compensated measure, and the pathwise functionals entering the inequalities.
//! - [`inequalities`]: explicit constants and Monte Carlo verdicts.
//! - [`config`], [`report`], [`runner`]: the experiment runner behind the CLI.

pub mod config;
pub mod convex;
pub mod error;
pub mod filtration;
pub mod inequalities;
pub mod integrator;
pub mod norm;
pub mod prm;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use norm::Norm;
