//! Sparse-coding action recognition.
//!
//! A video is summarised by `K` key-sequences, short frame windows centred on
//! frames that contribute most to a joint row-sparse reconstruction of the
//! video and its class. Each key-sequence is described by HOG3D cuboids that
//! are sparse-coded against class/position dictionary banks; pooled code mass
//! yields the inter-class (`phi`) and intra-class (`psi`) relative descriptors
//! whose concatenation is classified by sparse reconstruction and majority
//! vote.

pub mod error;
pub mod harness;
pub mod io;
pub mod itra;
pub mod seed;
pub mod classifier;
pub mod decomposition;
pub mod descriptors;
pub mod sparse_solvers;
pub mod video;

pub use error::{Error, Result};
pub use sparse_solvers::{
    ksvd, omp, project_l12_ball, solve_joint_row_sparse, AdmmConfig, Dictionary, DictionaryMeta,
    KsvdResult, OmpCoder, RowSparseSolution, SparseCode,
};
