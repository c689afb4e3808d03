//! Low-storage additive semi-implicit Runge-Kutta (ASIRK) schemes.
//!
//! An s-stage scheme (ℬ, 𝒞, ω) advances y' = f(y) + g(y), with f non-stiff
//! and g stiff, through
//!
//! ```text
//! K_i = h f(y + Σ_{j<i} b_ij K_j) + h g(y + Σ_{j<i} c_ij K_j + c_ii K_i)
//! y⁺  = y + Σ ω_i K_i
//! ```
//!
//! When the coefficients follow the (ω, γ, λ) pattern the step needs only
//! three N-vectors, independent of s.

pub mod conditions;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod linalg;
pub mod problems;
pub mod rational;
pub mod stability;
pub mod tableau;

pub use error::{Error, Result};
pub use rational::Rational;
pub use tableau::{AsirkScheme, CoefficientKind, ImexTableau, LowStorageParams, Scheme};
