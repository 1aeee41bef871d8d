//! Uzawa-type iterative solvers for sparse nonsymmetric saddle point systems
//!
//! This crate solves block systems
//!
//! ```text
//! [ A  B^T ] [x]   [f]
//! [ B  -C  ] [y] = [h]
//! ```
//!
//! where `A` (n x n) is positive definite but possibly nonsymmetric, `B`
//! (m x n, m <= n) has full row rank, and `C` (m x m) is symmetric positive
//! semidefinite. Eliminating `x` reduces the system to the Schur equation
//! `S y = b` with `S = B A^-1 B^T + C`, which the solvers attack without
//! ever forming `S`: `A` is factored once and each application of `S` costs
//! one sparse triangular solve pair.
//!
//! Two iterations are provided:
//!
//! * [`solvers::uzawa_exact_solve`] - an exact-line-search descent on the
//!   least-squares functional `Q(y) = 1/2 ||S y - b||^2`, which converges
//!   for any positive definite `A` (no stepsize to tune, nonsymmetric `A`
//!   welcome) at a provable geometric rate.
//! * [`solvers::uzawa_classical_solve`] - the classical fixed-stepsize
//!   Uzawa baseline, which requires a hand-picked relaxation parameter and
//!   may diverge.
//!
//! The [`analysis`] module certifies runs numerically: it forms `S` densely
//! at desk scale, computes the spectral constants behind the convergence
//! rate, and re-checks the contraction bound and error decay along a
//! recorded iteration history, entirely through an independent dense code
//! path. [`problem_gen`] builds reproducible test problems (random linear
//! variational-inequality style systems and a staggered-grid Oseen
//! discretization); [`market`] persists systems as Matrix Market bundles.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run --release --example solve_linear_vi
//! cargo run --release --example solve_oseen
//! cargo run --release --example classical_vs_exact
//! cargo run --release --example verify_theorems
//! cargo run --release --example market_roundtrip
//! cargo run --release --example condition_sweep
//! ```
//!
//! A thin `uzawa` binary exposes the same flows as subcommands
//! (`gen`, `solve`, `verify`, `sweep`); see the repository README.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod limits;
pub mod market;
pub mod problem_gen;
pub mod rng;
pub mod solvers;
pub mod sparse;
pub mod system;

pub use error::{Error, Result};
pub use sparse::{DenseVector, SparseMatrix};
pub use system::SaddleSystem;
