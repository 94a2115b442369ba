//! Exact Bloch solutions of the associated Lamé equation, first-order SUSY
//! partner potentials built from them, and an independent Floquet/Hill
//! verifier.

// NaN-rejecting guards are written as `!(a < b)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod lame;
pub mod numerics;
pub mod parallel;
pub mod spectral;
pub mod susy;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
