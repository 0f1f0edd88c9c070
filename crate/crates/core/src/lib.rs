//! Wigner functions of finite coherent-state superpositions, negativity
//! certification and critical residual coherence.

pub mod bessel;
pub mod cat;
pub mod circle;
pub mod error;
pub mod fock;
pub mod phase;
pub mod solver;
pub mod summation;
pub mod sweep;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
