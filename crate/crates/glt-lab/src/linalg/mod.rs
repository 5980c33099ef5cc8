//! Dense Hermitian linear algebra.

mod eig;
mod funcs;
mod matrix;

pub use eig::{
    eig_hermitian, eig_hermitian_with, eigvals_hermitian, eigvals_hermitian_with, EigDecomposition,
    EigMethod,
};
pub use funcs::{
    cholesky, hpd_function, hpd_function_with, kron, schatten_norm, singular_values, solve_lower, whiten, ScalarFn,
};
pub use matrix::{C64, HermitianMatrix, Matrix};
