//! Analytic orders of Tate-Shafarevich groups for quadratic twists of Frey
//! curves built from abc triples.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, parallel
//! coefficient production and the command line live in the `freysha` crate.
//!
//! The pipeline, bottom-up:
//!
//! * [`arith`]: factored integers, factorization, and [`arith::BigReal`],
//!   a deterministic arbitrary-precision real with AGM, `exp`, `ln`.
//! * [`triples`]: validated abc triples with radical, quality and merit.
//! * [`curves`]: the four-curve isogeny class of a twisted Frey curve, with
//!   local data from Tate's algorithm, conductor, Tamagawa coefficients
//!   `C_k` and the closed-form ratio `G/L`.
//! * [`lseries`]: Dirichlet coefficients by point counting and the truncated
//!   central-value sum with checkpointable state.
//! * [`sha`]: `|Sha|` from `L`, the Goldfeld-Szpiro ratio and the burden
//!   estimate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod arith;
pub mod curves;
pub mod lseries;
pub mod sha;
pub mod triples;

pub use arith::{BigReal, FactoredInteger, Precision};
pub use curves::IsogenyClass;
pub use triples::AbcTriple;
