//! Coefficient bounds for bi-univalent classes defined by Hadamard
//! convolution, with the machinery to check them numerically.
//!
//! * [`series`]: truncated complex power series (arithmetic, composition,
//!   reversion, Hadamard product).
//! * [`classes`]: measure-based generators for P_m(beta) and membership tests.
//! * [`operators`]: the class-defining operators and low-order constructions.
//! * [`bounds`]: closed-form bounds on `|a_2|`, `|a_3|`, `|2 a_2^2 - a_3|`.
//! * [`harness`]: sampling, verification and tightness search.
//!
//! The harness does not certify univalence of constructed functions. The
//! bounds follow from the two P_m(beta) conditions alone, and those are what
//! a sample is graded on.

pub mod bounds;
pub mod classes;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod operators;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::{NormalizedFunction, TruncatedSeries};
