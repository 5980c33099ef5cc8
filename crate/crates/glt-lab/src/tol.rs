//! Numerical tolerances shared across the crate.

/// Hermitian check: `max |a_ij - conj(a_ji)| <= HERMITIAN * (1 + max |a_ij|)`.
pub const HERMITIAN: f64 = 1e-12;

/// Jacobi stops once every off-diagonal pair is negligible relative to its diagonal.
pub const JACOBI_REL: f64 = f64::EPSILON;

/// Hard cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Hard cap on implicit QL iterations per eigenvalue.
pub const QL_MAX_ITER: usize = 60;

/// Orders up to this use Jacobi under `EigMethod::Auto`.
pub const JACOBI_AUTO_MAX_ORDER: usize = 64;

/// Negative eigenvalues within this fraction of the spectral radius are
/// treated as zero by fractional powers of semidefinite matrices.
pub const PSD_CLAMP: f64 = 1e-12;

/// Karcher iteration defaults.
pub const KARCHER_RESIDUAL: f64 = 1e-10;
pub const KARCHER_MAX_ITER: usize = 200;
pub const KARCHER_THETA_HALVINGS: usize = 10;

/// `c_j` closer than this to 1 uses the analytic limit of `log c / (c - 1)`.
pub const KARCHER_C_ONE: f64 = 1e-12;

/// Candidate symbol defaults.
pub const CANDIDATE_STAB_TOL: f64 = 1e-6;
pub const CANDIDATE_EPS: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Default spectral threshold for the "below threshold" fraction.
pub const SPECTRAL_THRESHOLD: f64 = 0.1;

/// Largest spin count accepted by the full Curie-Weiss builder.
pub const CW_FULL_MAX_SPINS: usize = 14;
