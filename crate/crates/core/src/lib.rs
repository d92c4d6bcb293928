//! Exact traces of the Fricke involution `W_N` on `S_k(Γ0(N))` and on its new
//! subspace, and the resulting root number bias
//! `Δ(N,k) = dim S_k^new(N)^+ − dim S_k^new(N)^−`.
//!
//! Every closed form in [`trace`] has an independent evaluation route (a raw
//! class number sum, or Möbius inversion over levels) so the two can be
//! checked against each other; see [`verify`].

pub mod arith;
pub mod bias;
pub mod classnum;
pub mod dims;
mod error;
pub mod trace;
pub mod verify;

pub use arith::{decompose_level, factor, kronecker, Factorization, LevelDecomposition, Rational};
pub use error::{check_weight, Error, Result};
