//! Thue–Morse digit sums along index sequences `⌊f(n)⌋`.
//!
//! The crate evaluates `t(⌊f(n)⌋)` exactly for a catalog of slowly growing
//! index functions (Piatetski-Shapiro powers `n^c` among them) and computes
//! the objects used to study normality of the resulting binary sequence:
//! discrete Fourier coefficients of truncated digit sums, the digit-phase
//! exponential sums, the dissection of `(A, 2A]` into cells on which the
//! floors become affine, and block-frequency statistics.

pub mod digits;
pub mod dissection;
pub mod error;
pub mod expsum;
pub mod fourier;
pub mod indexfn;
mod par;
pub mod stats;

pub use error::{Error, Result};
pub use indexfn::{Family, IndexFunction, IndexMap, Real};
