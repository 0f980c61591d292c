//! Holographic, spectral-holographic and complex embeddings for knowledge
//! graph completion.
//!
//! * [`spectral`]: circular convolution/correlation, the DFT and its
//!   conjugate-symmetric packing.
//! * [`scoring`]: the three trilinear scoring functions and their gradients.
//! * [`train`]: SGD on the logistic objective with negative sampling.
//! * [`equivalence`]: complex → holographic model conversion and its verifier.
//! * [`eval`]: filtered and raw MRR / Hits@k.
//! * [`data`] and [`model_file`]: triple files, the synthetic ring dataset
//!   and the binary model format.

pub mod bench;
pub mod data;
pub mod equivalence;
pub mod error;
pub mod eval;
pub mod exec;
pub mod model;
pub mod model_file;
pub mod scoring;
pub mod selftest;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{Embeddings, ModelKind, ModelParams, Triple, Vocab};
