//! Optimal single-actuator design for symmetric, completely unstable linear
//! systems `ẋ = Ax + bu`.
//!
//! For `A` positive definite with distinct eigenvalues the actuator `b` that
//! minimizes the worst-case (over unit initial states) minimum steering energy
//! has a closed form in terms of the Cauchy matrix `Ψ = [1/(λᵢ+λⱼ)]`. This
//! crate computes it ([`minimax`]) and cross-checks it three ways: gradient
//! ascent on the sphere ([`optimizer`]), simulation of the steering input
//! ([`control`]) and exact rational evaluation of the Cauchy algebra
//! ([`cauchy`] over [`scalar::Rational`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod cli;
pub mod control;
pub mod error;
pub mod gramian;
pub mod linalg;
pub mod minimax;
pub mod ode;
pub mod optimizer;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use minimax::{solve, MinimaxSolution};
pub use spectrum::{diagonalize, validate_spectrum, Spectrum, SymmetricSystem, UnitVector};
