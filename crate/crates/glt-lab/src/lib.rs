//! Structured matrix-sequences and their spectral symbols.
//!
//! The crate builds Toeplitz-like and GLT-type matrix-sequences, computes
//! geometric and Karcher means of Hermitian positive definite matrices, and
//! compares the resulting spectra with the predicted symbols.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretizations;
pub mod error;
pub mod experiments;
pub mod geomean;
pub mod io;
pub mod linalg;
pub mod spectral;
pub mod structured;
pub mod symbols;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{C64, HermitianMatrix, Matrix};

/// Configure the global rayon pool from `GLT_LAB_THREADS`, if set.
///
/// Returns the thread cap that was applied. Calling it twice is harmless.
pub fn configure_threads_from_env() -> Option<usize> {
    let n = std::env::var("GLT_LAB_THREADS")
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}
