//! Feature-partitioned distributed least squares.
//!
//! The model unknowns of a linear regression problem are split column-wise
//! over `K` nodes. Each node repeatedly solves a small regularized local
//! subproblem and shares its contribution to the fit through a coordinator,
//! which is the CoCoA scheme specialized to quadratic losses. The crate
//! provides:
//!
//! - [`numkern`]: dense SVD-based kernels (pseudoinverse, spectral norms,
//!   Haar-orthogonal sampling) that everything else builds on,
//! - [`datagen`]: seeded synthetic data families (isotropic/correlated
//!   Gaussian, Bernoulli), IDX image ingestion and random Fourier features,
//! - [`cocoa`]: the coordinator/worker solver, its closed-form iteration
//!   operator `B = I - (1/K) Ā A`, and the centralized reference solution,
//! - [`theory`]: high-probability bounds on `‖B‖` for isotropic Gaussian,
//!   correlated Gaussian and sub-gaussian regressors, plus the exact
//!   average generalization error of the first iterate,
//! - [`harness`]: a deterministic Monte Carlo experiment engine with CSV
//!   reporting, driven by the `distls` command line tool.
//!
//! All randomness flows through explicitly seeded ChaCha streams, so every
//! experiment is reproducible bit-for-bit regardless of thread count.

pub mod cocoa;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod numkern;
pub mod theory;

pub use error::{Error, Result};

/// Dense row-major-logical matrix of finite `f64` entries.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector of finite `f64` entries.
pub type Vector = nalgebra::DVector<f64>;
