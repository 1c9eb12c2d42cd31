//! Exact α-permanents of block matrices and simulation of discrete-time
//! Markov loop soups.
//!
//! The crate is organised in layers:
//!
//! * [`model`]: matrices, their induced graphs, block expansion `A[q]` and
//!   the crossing-support sets `T_q` of *-forests.
//! * [`permanent`]: α-permanents as exact polynomials in α, by brute force,
//!   grouped by crossing matrix, and by the *-forest closed form.
//! * [`series`]: truncated multivariate power series used to check
//!   `det(I - ZA)^{-α} = Σ_q per_α(A[q]) Π z_i^{q_i} / q_i!`.
//! * [`chain`] and [`loops`]: sub-Markovian chains, Green functions, the
//!   h-transform and star expansion, and the unrooted loop measure.
//! * [`soup`]: Poisson loop soup sampling, the negative multinomial cascade
//!   on trees, occupation laws and empirical comparison.

pub mod chain;
pub mod error;
pub mod loops;
pub mod matrix;
pub mod model;
pub mod permanent;
pub mod poly;
pub mod scalar;
pub mod series;
pub mod soup;

pub use error::{Error, Result};
pub use matrix::{Matrix, ScalarMode, SquareMatrix};
pub use model::{BlockSpec, Classification, CrossingMatrix, InducedGraph};
pub use poly::AlphaPolynomial;
pub use scalar::{parse_rational, Rational, Scalar};
