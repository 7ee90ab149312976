//! Numerical core: constrained joint row-sparse reconstruction, Orthogonal
//! Matching Pursuit and K-SVD dictionary learning.

mod admm;
mod dictionary;
mod ksvd;
mod omp;
mod projection;

pub use admm::{
    is_feasible, joint_objective, solve_joint_row_sparse, AdmmConfig, RowSparseSolution, RIDGE,
};
pub use dictionary::{Dictionary, DictionaryMeta, UNIT_NORM_TOL};
pub use ksvd::{ksvd, KsvdResult};
pub use omp::{omp, OmpCoder, SparseCode, RESIDUAL_STOP};
pub use projection::{l12_norm, project_l12_ball, project_nonneg_l1_ball};
