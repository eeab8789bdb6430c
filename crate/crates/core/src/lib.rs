//! Discrete fractional calculus on finite horizons.
//!
//! This crate implements the calculus of fractional differences for
//! vector-valued sequences `u : {0, .., N} -> R^d` and the operator
//! machinery built on top of it:
//!
//! * [`kernels`] — Cesàro kernels `k^α`, finite convolution, partial
//!   Z-transforms, forward differences, and the Mittag-Leffler function.
//! * [`fracdiff`] — fractional sums and the Riemann–Liouville / Caputo
//!   fractional differences of order `1 < α ≤ 2`.
//! * [`linop`] — finite-dimensional operators (dense, diagonal, 1-D
//!   Dirichlet Laplacian) with resolvent solves.
//! * [`resolvent`] — discrete α-resolvent families `S_α(n)` generated by an
//!   operator, constructed by three independent methods and validated
//!   against their defining functional equation.
//! * [`poisson`] — the Poisson transformation
//!   `P(ψ)(n) = ∫ e^{-t} t^n/n! ψ(t) dt`, its closed forms, and the
//!   subordination of continuous resolvent families to discrete ones.
//! * [`solver`] — initial value problems `Δ^α u(n) = A u(n+2) + f(n, u(n))`
//!   (linear, inhomogeneous, nonlinear), weighted sequence spaces, and a
//!   residual oracle.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm`. Everything is plain `f64` with per-operation
//! tolerances documented where they matter.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod fracdiff;
pub mod kernels;
pub mod linop;
pub mod matrix;
pub mod poisson;
pub mod resolvent;
pub mod rng;
pub mod solver;

mod math;

pub use error::{Error, Result};
pub use fracdiff::VecSeq;
pub use kernels::{FracOrder, ScalarSeq};
pub use linop::LinOperator;
pub use matrix::Matrix;
pub use resolvent::{BuildMethod, ResolventFamily};
pub use solver::{Forcing, ProblemSpec, WeightKind, WeightedSpace};
