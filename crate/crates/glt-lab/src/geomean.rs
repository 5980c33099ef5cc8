//! Geometric means of Hermitian positive definite matrices.
//!
//! [`alm_mean`] is the closed-form two-matrix mean. [`karcher_mean`] solves
//! `sum_i log(X^{1/2} A_i^{-1} X^{1/2}) = 0` by a Richardson iteration whose
//! step is recomputed from the current condition numbers.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, eig_hermitian, eigvals_hermitian, hpd_function, hpd_function_with, whiten, EigMethod, EigDecomposition, HermitianMatrix,
    Matrix, ScalarFn,
};
use crate::tol;

fn require_same_order(list: &[&HermitianMatrix]) -> Result<usize> {
    let n = list.first().map(|a| a.order()).unwrap_or(0);
    if list.iter().any(|a| a.order() != n) {
        return Err(Error::Shape("matrices of different orders".into()));
    }
    Ok(n)
}

fn require_hpd(e: &EigDecomposition) -> Result<()> {
    let l = e.lambda_min();
    if e.eigenvalues.is_empty() || l > 0.0 {
        Ok(())
    } else {
        Err(Error::NotHpd { lambda_min: l })
    }
}

/// `A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
///
/// `A` must be positive definite. `B` may be semidefinite up to rounding
/// (eigenvalues down to `-PSD_CLAMP * rho(B)`), which happens for products
/// like `C T C` whose exact smallest eigenvalue is below machine precision.
pub fn alm_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    require_same_order(&[a, b])?;
    let ea = eig_hermitian(a)?;
    require_hpd(&ea)?;
    let lb = eigvals_hermitian(b)?;
    if let (Some(&l), Some(&h)) = (lb.first(), lb.last()) {
        if !(l > 0.0 || l >= -tol::PSD_CLAMP * h.abs().max(l.abs())) || h <= 0.0 {
            return Err(Error::NotHpd { lambda_min: l });
        }
    }
    let half = ea.reconstruct_with(f64::sqrt);
    let ihalf = ea.reconstruct_with(|x| 1.0 / x.sqrt());
    let c = b.congruence(&ihalf)?;
    // The whitened matrix is graded when A is ill conditioned; Jacobi keeps
    // its small eigenvalues accurate where Householder reduction would not.
    let s = hpd_function_with(&c, ScalarFn::Sqrt, EigMethod::Jacobi)?;
    let g = half.matmul(&s)?.matmul(&half)?;
    Ok(HermitianMatrix::from_hermitian_part(&g))
}

/// `(A B^2 A)^{1/4}`, inversion-free and defined for semidefinite input.
/// Equals [`alm_mean`] when `A` and `B` commute.
pub fn commuting_form_mean(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    require_same_order(&[a, b])?;
    let ab = a.matmul(b)?;
    let m = HermitianMatrix::from_hermitian_part(&ab.matmul(&ab.adjoint())?);
    hpd_function(&m, ScalarFn::Pow(0.25))
}

/// Step data for one adaptive Richardson iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaStep {
    pub theta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: Vec<f64>,
}

/// `log c / (c - 1)` and `c log c / (c - 1)`, with the limit 1 near `c = 1`.
fn beta_gamma_terms(c: f64) -> (f64, f64) {
    if (c - 1.0).abs() < tol::KARCHER_C_ONE {
        (1.0, 1.0)
    } else {
        let q = c.ln() / (c - 1.0);
        (q, c * q)
    }
}

/// `theta = 2 / (beta + gamma)` from condition numbers `c_j`.
pub fn theta_from_conditions(c: &[f64]) -> ThetaStep {
    let (mut beta, mut gamma) = (0.0, 0.0);
    for &cj in c {
        let (b, g) = beta_gamma_terms(cj);
        beta += b;
        gamma += g;
    }
    ThetaStep { theta: 2.0 / (beta + gamma), beta, gamma, c: c.to_vec() }
}

/// Adaptive step at iterate `g`: `c_j = cond(G^{1/2} A_j^{-1} G^{1/2})`.
pub fn karcher_step_theta(g: &HermitianMatrix, list: &[HermitianMatrix]) -> Result<ThetaStep> {
    let refs: Vec<&HermitianMatrix> = std::iter::once(g).chain(list.iter()).collect();
    require_same_order(&refs)?;
    let eg = eig_hermitian(g)?;
    require_hpd(&eg)?;
    let gh = eg.reconstruct_with(f64::sqrt);
    let c = list
        .iter()
        .map(|a| {
            let ainv = hpd_function(a, ScalarFn::Inverse)?;
            let m = ainv.congruence(&gh)?;
            let l = eigvals_hermitian(&m)?;
            let (lo, hi) = (l[0], l[l.len() - 1]);
            if !(lo > 0.0) {
                return Err(Error::NotHpd { lambda_min: lo });
            }
            Ok(hi / lo)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(theta_from_conditions(&c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    Adaptive,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitMode {
    ArithmeticMean,
    FirstMatrix,
    Identity,
    Given(HermitianMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KarcherConfig {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub theta_mode: ThetaMode,
    pub init_mode: InitMode,
    pub use_cholesky_form: bool,
}

impl Default for KarcherConfig {
    fn default() -> Self {
        Self {
            max_iterations: tol::KARCHER_MAX_ITER,
            residual_tol: tol::KARCHER_RESIDUAL,
            theta_mode: ThetaMode::Adaptive,
            init_mode: InitMode::ArithmeticMean,
            use_cholesky_form: true,
        }
    }
}

impl KarcherConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("residual_tol must be positive".into()));
        }
        if let ThetaMode::Fixed(t) = self.theta_mode {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("fixed theta must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct KarcherResult {
    pub mean: HermitianMatrix,
    /// Number of updates applied to the starting point.
    pub iterations: usize,
    /// Residual at every visited iterate, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Gradient at `x`: the sum of logs and the per-matrix condition numbers.
struct Gradient {
    /// `sum_i log(L^{-1} A_i L^{-*})` (Cholesky form) or
    /// `sum_i log(X^{1/2} A_i^{-1} X^{1/2})`.
    sum: HermitianMatrix,
    cond: Vec<f64>,
    /// `L` or `X^{1/2}`.
    factor: Matrix,
}

fn sum_hermitian(terms: Vec<HermitianMatrix>, n: usize) -> HermitianMatrix {
    terms.iter().fold(HermitianMatrix::from_real_diag(&vec![0.0; n]), |acc, t| &acc + t)
}

fn log_and_cond(m: &HermitianMatrix) -> Result<(HermitianMatrix, f64)> {
    let e = eig_hermitian(m)?;
    require_hpd(&e)?;
    Ok((e.reconstruct_with(f64::ln), e.lambda_max() / e.lambda_min()))
}

fn gradient(x: &HermitianMatrix, list: &[HermitianMatrix], inverses: Option<&[HermitianMatrix]>) -> Result<Gradient> {
    let n = x.order();
    match inverses {
        None => {
            let l = cholesky(x)?;
            let parts = list
                .par_iter()
                .map(|a| log_and_cond(&whiten(&l, a)?))
                .collect::<Result<Vec<_>>>()?;
            let (logs, cond): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
            Ok(Gradient { sum: sum_hermitian(logs, n), cond, factor: l })
        }
        Some(inv) => {
            let ex = eig_hermitian(x)?;
            require_hpd(&ex)?;
            let h = ex.reconstruct_with(f64::sqrt).into_matrix();
            let parts = inv
                .par_iter()
                .map(|ai| log_and_cond(&ai.congruence(&h)?))
                .collect::<Result<Vec<_>>>()?;
            let (logs, cond): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
            Ok(Gradient { sum: sum_hermitian(logs, n), cond, factor: h })
        }
    }
}

/// `X + theta L S L*` (Cholesky form) or `X - theta X^{1/2} S X^{1/2}`.
fn step(x: &HermitianMatrix, g: &Gradient, theta: f64, cholesky_form: bool) -> Result<HermitianMatrix> {
    let f = &g.factor;
    let t = f.matmul(&g.sum)?.matmul(&f.adjoint())?;
    let s = if cholesky_form { theta } else { -theta };
    Ok(HermitianMatrix::from_hermitian_part(&(&**x + &t.scale(s))))
}

fn is_pd(x: &HermitianMatrix) -> bool {
    cholesky(x).is_ok()
}

/// Karcher mean of `k >= 2` HPD matrices.
pub fn karcher_mean(list: &[HermitianMatrix], cfg: &KarcherConfig) -> Result<KarcherResult> {
    cfg.validate()?;
    if list.len() < 2 {
        return Err(Error::InvalidInput(format!("Karcher mean needs at least two matrices, got {}", list.len())));
    }
    let refs: Vec<&HermitianMatrix> = list.iter().collect();
    let n = require_same_order(&refs)?;
    for a in list {
        if let Err(e) = cholesky(a) {
            let lmin = eigvals_hermitian(a)?.first().copied().unwrap_or(0.0);
            warn!("Karcher input is not positive definite: {e}");
            return Err(Error::NotHpd { lambda_min: lmin });
        }
    }
    let inverses = if cfg.use_cholesky_form {
        None
    } else {
        Some(list.iter().map(|a| hpd_function(a, ScalarFn::Inverse)).collect::<Result<Vec<_>>>()?)
    };
    let mut x = match &cfg.init_mode {
        InitMode::ArithmeticMean => {
            sum_hermitian(list.to_vec(), n).scale(1.0 / list.len() as f64)
        }
        InitMode::FirstMatrix => list[0].clone(),
        InitMode::Identity => HermitianMatrix::identity(n),
        InitMode::Given(m) => {
            if m.order() != n {
                return Err(Error::Shape("initial guess has the wrong order".into()));
            }
            m.clone()
        }
    };
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let g = gradient(&x, list, inverses.as_deref())?;
        let res = g.sum.frobenius();
        history.push(res);
        if res < cfg.residual_tol {
            return Ok(KarcherResult { mean: x, iterations, residual_history: history, converged: true });
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        let mut theta = match cfg.theta_mode {
            ThetaMode::Adaptive => theta_from_conditions(&g.cond).theta,
            ThetaMode::Fixed(t) => t,
        };
        let mut next = None;
        for _ in 0..=tol::KARCHER_THETA_HALVINGS {
            let cand = step(&x, &g, theta, cfg.use_cholesky_form)?;
            if is_pd(&cand) {
                next = Some(cand);
                break;
            }
            theta *= 0.5;
        }
        match next {
            Some(nx) => x = nx,
            None => {
                warn!("Karcher iterate lost positive definiteness after {iterations} steps");
                return Ok(KarcherResult { mean: x, iterations, residual_history: history, converged: false });
            }
        }
        iterations += 1;
    }
    if history.len() > 4 {
        let tail = &history[3..];
        if tail.windows(2).any(|w| w[1] > w[0]) {
            warn!("Karcher residual history is not monotone");
        }
    }
    Ok(KarcherResult { mean: x, iterations, residual_history: history, converged: false })
}

/// `|| sum_i log(X^{1/2} A_i^{-1} X^{1/2}) ||_F`.
pub fn karcher_residual(x: &HermitianMatrix, list: &[HermitianMatrix]) -> Result<f64> {
    let refs: Vec<&HermitianMatrix> = std::iter::once(x).chain(list.iter()).collect();
    require_same_order(&refs)?;
    let ex = eig_hermitian(x)?;
    require_hpd(&ex)?;
    let h = ex.reconstruct_with(f64::sqrt).into_matrix();
    let logs = list
        .iter()
        .map(|a| {
            let ainv = hpd_function(a, ScalarFn::Inverse)?;
            hpd_function(&ainv.congruence(&h)?, ScalarFn::Log)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_hermitian(logs, x.order()).frobenius())
}
