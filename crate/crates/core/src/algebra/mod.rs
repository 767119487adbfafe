//! Complex linear algebra on truncated Fock spaces and their tensor products.

mod eig;
mod operator;
mod sparse;
mod state;

pub use eig::{
    hermitian_eigh, hermitian_eigh_dense, hermitian_eigs, hermitian_eigvals_dense, nonzero_blocks, trace_distance,
    HermitianEigen, HERMITICITY_TOL, POSITIVITY_TOL,
};
pub use operator::{
    annihilation_op, basis_index, creation_op, embed, kron, max_abs_diff, number_op, sigma_minus, sigma_plus,
    vec_norm, Operator,
};
pub use sparse::{CsrMatrix, SharedPattern};
pub(crate) use sparse::spmm_colmajor;
pub use state::{StateDiagnostics, SystemState};
