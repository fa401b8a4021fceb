//! Numerical laboratory for a diffuse-interface tumor growth model and its
//! sharp-interface limit.
//!
//! The diffuse system on a bounded domain with homogeneous Neumann data is
//!
//! ```text
//! u_t - Δμ = 2σ + u - μ
//! σ_t - Δσ = -(2σ + u - μ)
//! εμ = -ε²Δu + f'(u),      f(u) = (u² - 1)²
//! ```
//!
//! As ε → 0 it is approximated by a two-phase free-boundary problem
//! ([`sharp`]) whose solution, together with first-order corrections, is
//! turned into a glued approximate solution ([`asymptotic`]) and compared
//! against direct simulations ([`diffuse`], [`analysis`]).
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod asymptotic;
pub mod diffuse;
mod error;
pub mod grid;
pub mod linalg;
pub mod math;
pub mod profile;
pub mod quad;
pub mod sharp;
pub mod spectral;

pub use error::{Error, Result};
