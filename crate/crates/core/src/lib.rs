//! Knowledge-graph embeddings in complex hyperbolic space.
//!
//! Entities live as tangent vectors lifted into a relation-curved Poincare
//! ball, relations act through Givens rotations/reflections with optional
//! attention and a Mobius translation, and the FFT variants score queries in
//! the complex unit ball reached through an orthonormal DFT. Training runs
//! full cross-entropy against uniformly sampled negatives with a from-scratch
//! reverse-mode tape, and evaluation reports filtered MRR and Hits@N.

pub mod checkpoint;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grad;
pub mod model;
mod numeric;
mod parallel;
pub mod spectral;
pub mod train;
pub mod transforms;

pub use error::{Error, Result};
