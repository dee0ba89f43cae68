//! Phase retrieval from periodic short-time Fourier transform magnitudes.
//!
//! The library covers the forward measurement model, the trivial ambiguity
//! group, measurement-count bounds with the sets that attain them, a
//! constructive solver that follows those sets (known and blind window),
//! and the relaxed-reflect-reflect iteration with its experiment harness.

pub mod ambiguity;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod harness;
pub mod intensity;
pub mod problem;
pub mod proof_solver;
pub mod rrr;
pub mod stft;

pub use error::{Error, Result};
