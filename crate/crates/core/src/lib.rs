//! Semi-supervised subspace clustering with a tensor low-rank representation.
//!
//! Pairwise must-link / cannot-link constraints are encoded as a signed matrix
//! `B`, stacked with the representation `Z` into a two-slice tensor, and the
//! pair is learned jointly by ADMM. The learned `B` then repairs `Z` before
//! spectral clustering.

pub mod constraints;
pub mod data;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod postprocess;
pub mod solver;
pub mod spectral;
pub mod tensor;

pub use constraints::{ConstraintSet, PairwiseMatrix};
pub use data::{DataMatrix, Dataset};
pub use error::{Error, Result};
pub use solver::{Hyperparams, Scale, SolveResult};
pub use spectral::Partition;
pub use tensor::Tensor2;
