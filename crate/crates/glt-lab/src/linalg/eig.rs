//! Hermitian eigensolvers.
//!
//! Two algorithms are provided. Cyclic Jacobi is simple and very accurate on
//! small matrices; Householder tridiagonalization followed by implicit QL is
//! cubic with a small constant and handles the larger orders. Real input runs
//! in real arithmetic.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rayon::prelude::*;

use super::matrix::{C64, HermitianMatrix, Matrix};
use crate::error::{Error, Result};
use crate::tol;

/// Eigenvalues in nondecreasing order with unitary eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigDecomposition {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `V diag(f(lambda)) V*`, symmetrized.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)).collect();
        let w = self.eigenvectors.scale_cols(&d);
        let m = w.matmul(&self.eigenvectors.adjoint()).expect("square factors");
        HermitianMatrix::from_hermitian_part(&m)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigMethod {
    /// Jacobi up to [`tol::JACOBI_AUTO_MAX_ORDER`], tridiagonal QL above.
    #[default]
    Auto,
    Jacobi,
    Tridiagonal,
}

pub fn eig_hermitian(a: &HermitianMatrix) -> Result<EigDecomposition> {
    eig_hermitian_with(a, EigMethod::Auto)
}

pub fn eig_hermitian_with(a: &HermitianMatrix, method: EigMethod) -> Result<EigDecomposition> {
    let n = a.order();
    let method = resolve(method, n);
    let (vals, vecs_t) = if a.is_real() {
        let m: Vec<f64> = a.data().iter().map(|z| z.re).collect();
        let (vals, z) = run(m, n, method, true)?;
        (vals, z.into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>())
    } else {
        run(a.data().to_vec(), n, method, true)?
    };
    Ok(sorted(vals, Some(vecs_t), n))
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(a: &HermitianMatrix) -> Result<Vec<f64>> {
    eigvals_hermitian_with(a, EigMethod::Auto)
}

pub fn eigvals_hermitian_with(a: &HermitianMatrix, method: EigMethod) -> Result<Vec<f64>> {
    let n = a.order();
    let method = resolve(method, n);
    let vals = if a.is_real() {
        let m: Vec<f64> = a.data().iter().map(|z| z.re).collect();
        run(m, n, method, false)?.0
    } else {
        run(a.data().to_vec(), n, method, false)?.0
    };
    let mut vals = vals;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn resolve(method: EigMethod, n: usize) -> EigMethod {
    match method {
        EigMethod::Auto if n <= tol::JACOBI_AUTO_MAX_ORDER => EigMethod::Jacobi,
        EigMethod::Auto => EigMethod::Tridiagonal,
        m => m,
    }
}

fn run<T: Field>(a: Vec<T>, n: usize, method: EigMethod, vectors: bool) -> Result<(Vec<f64>, Vec<T>)> {
    match method {
        EigMethod::Jacobi => jacobi(a, n, vectors),
        _ => tridiagonal_ql(a, n, vectors),
    }
}

/// Sort eigenpairs. `vecs_t` holds eigenvectors as rows.
fn sorted(vals: Vec<f64>, vecs_t: Option<Vec<C64>>, n: usize) -> EigDecomposition {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let eigenvectors = match vecs_t {
        Some(z) => Matrix::from_fn(n, n, |r, c| z[idx[c] * n + r]),
        None => Matrix::zeros(0, 0),
    };
    EigDecomposition { eigenvalues, eigenvectors }
}

/// Scalar field the solvers are generic over (real or complex doubles).
pub(crate) trait Field:
    Copy
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn abs(self) -> f64 {
        self.abs2().sqrt()
    }
    /// `z / |z|`, or one at zero.
    fn phase(self) -> Self {
        let a = self.abs();
        if a == 0.0 {
            Self::from_re(1.0)
        } else {
            self.scale(1.0 / a)
        }
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Field for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

/// Cyclic Jacobi with a relative rotation threshold.
///
/// A pair `(p, q)` is rotated only when `|a_pq| > eps * sqrt(|a_pp a_qq|)`, so
/// small eigenvalues keep relative accuracy. Returns eigenvectors as rows.
fn jacobi<T: Field>(mut a: Vec<T>, n: usize, vectors: bool) -> Result<(Vec<f64>, Vec<T>)> {
    // Row r of `v` is column r of the accumulated rotation.
    let mut v: Vec<T> = if vectors {
        let mut v = vec![T::zero(); n * n];
        for i in 0..n {
            v[i * n + i] = T::from_re(1.0);
        }
        v
    } else {
        Vec::new()
    };
    for i in 0..n {
        a[i * n + i] = T::from_re(a[i * n + i].re());
    }
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let floor = f64::MIN_POSITIVE.max(scale * 1e-300);
    let mut converged = n <= 1;
    for _sweep in 0..tol::JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.abs();
                let app = a[p * n + p].re();
                let aqq = a[q * n + q].re();
                if g <= floor || g <= tol::JACOBI_REL * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                // Phase u makes the pivot real; then a real symmetric rotation.
                let u = apq.phase();
                let uc = u.conj();
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = [[c, s], [-s conj(u), c conj(u)]] on (p, q).
                let jqp = uc.scale(-s);
                let jqq = uc.scale(c);
                // A <- A J (columns).
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp.scale(c) + akq * jqp;
                    a[k * n + q] = akp.scale(s) + akq * jqq;
                }
                // A <- J* A (rows).
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk.scale(c) + jqp.conj() * aqk;
                    a[q * n + k] = apk.scale(s) + jqq.conj() * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                a[p * n + p] = T::from_re(a[p * n + p].re());
                a[q * n + q] = T::from_re(a[q * n + q].re());
                if vectors {
                    // Columns p, q of V are rows p, q of the stored transpose.
                    for k in 0..n {
                        let vkp = v[p * n + k];
                        let vkq = v[q * n + k];
                        v[p * n + k] = vkp.scale(c) + vkq * jqp;
                        v[q * n + k] = vkp.scale(s) + vkq * jqq;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Jacobi did not converge in {} sweeps (order {n})",
            tol::JACOBI_MAX_SWEEPS
        )));
    }
    let vals = (0..n).map(|i| a[i * n + i].re()).collect();
    Ok((vals, v))
}

const PAR_MIN: usize = 192;

/// Householder reduction to real tridiagonal form, then implicit QL.
/// Returns eigenvectors as rows.
fn tridiagonal_ql<T: Field>(mut a: Vec<T>, n: usize, vectors: bool) -> Result<(Vec<f64>, Vec<T>)> {
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut d = vec![0.0f64; n];
    // Complex subdiagonal: T(k+1, k).
    let mut sub = vec![T::zero(); n.saturating_sub(1)];
    let mut reflectors: Vec<(usize, f64, Vec<T>)> = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        // x = A[k+1.., k] = conj(A[k, k+1..]).
        let x: Vec<T> = a[k * n + k + 1..(k + 1) * n].iter().map(|z| z.conj()).collect();
        let tail: f64 = x[1..].iter().map(|z| z.abs2()).sum();
        d[k] = a[k * n + k].re();
        if tail == 0.0 {
            sub[k] = x[0];
            continue;
        }
        let x0 = x[0];
        let alpha = (x0.abs2() + tail).sqrt();
        let beta = -(x0.phase().scale(alpha));
        let mut v = x;
        v[0] = x0 - beta;
        let tau = 1.0 / (alpha * (alpha + x0.abs()));
        sub[k] = beta;

        // Trailing block S = A[k+1.., k+1..]; S <- H S H with H = I - tau v v*.
        let off = k + 1;
        let row_dot = |i: usize, a: &[T]| -> T {
            let row = &a[(off + i) * n + off..(off + i + 1) * n];
            let mut s = T::zero();
            for (aij, vj) in row.iter().zip(&v) {
                s += *aij * *vj;
            }
            s.scale(tau)
        };
        let p: Vec<T> = if m >= PAR_MIN {
            (0..m).into_par_iter().map(|i| row_dot(i, &a)).collect()
        } else {
            (0..m).map(|i| row_dot(i, &a)).collect()
        };
        let mut vp = T::zero();
        for (vi, pi) in v.iter().zip(&p) {
            vp += vi.conj() * *pi;
        }
        let kk = vp.scale(0.5 * tau);
        let w: Vec<T> = p.iter().zip(&v).map(|(pi, vi)| *pi - kk * *vi).collect();
        // S <- S - v w* - w v*.
        let update = |(i, row): (usize, &mut [T])| {
            let vi = v[i];
            let wi = w[i];
            let row = &mut row[off..];
            for j in 0..m {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        };
        let trailing = &mut a[off * n..];
        if m >= PAR_MIN {
            trailing.par_chunks_mut(n).enumerate().for_each(update);
        } else {
            trailing.chunks_mut(n).enumerate().for_each(update);
        }
        // Column k and row k are now (beta, 0, ...); they are not read again.
        if vectors {
            reflectors.push((off, tau, v));
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2].re();
        sub[n - 2] = a[(n - 1) * n + n - 2];
    }
    d[n - 1] = a[(n - 1) * n + n - 1].re();
    drop(a);

    // Diagonal unitary making the subdiagonal real and nonnegative.
    let mut phases = vec![T::from_re(1.0); n];
    let mut e = vec![0.0f64; n];
    for k in 0..n - 1 {
        phases[k + 1] = phases[k] * sub[k].phase();
        e[k] = sub[k].abs();
    }

    let mut zt: Vec<T> = Vec::new();
    if vectors {
        // Q = H_0 H_1 ... accumulated backwards, then Q D. Stored transposed.
        let mut q = vec![T::zero(); n * n];
        for i in 0..n {
            q[i * n + i] = T::from_re(1.0);
        }
        for (off, tau, v) in reflectors.iter().rev() {
            let off = *off;
            // Rows off.. of Q: Q <- Q - tau v (v* Q).
            let mut y = vec![T::zero(); n];
            for (i, vi) in v.iter().enumerate() {
                let c = vi.conj();
                let row = &q[(off + i) * n..(off + i + 1) * n];
                for (yj, qj) in y.iter_mut().zip(row) {
                    *yj += c * *qj;
                }
            }
            let upd = |(i, row): (usize, &mut [T])| {
                let s = v[i].scale(*tau);
                for (qj, yj) in row.iter_mut().zip(&y) {
                    *qj -= s * *yj;
                }
            };
            let rows = &mut q[off * n..];
            if n - off >= PAR_MIN {
                rows.par_chunks_mut(n).enumerate().for_each(upd);
            } else {
                rows.chunks_mut(n).enumerate().for_each(upd);
            }
        }
        zt = vec![T::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                zt[c * n + r] = q[r * n + c] * phases[c];
            }
        }
    }

    tql(&mut d, &mut e, if vectors { Some(&mut zt) } else { None }, n)?;
    Ok((d, zt))
}

/// Implicit QL on a real symmetric tridiagonal matrix.
///
/// `e[i]` couples `i` and `i + 1`; `e[n-1]` is scratch. Rotations are applied
/// to the rows of `zt` (eigenvectors stored as rows).
fn tql<T: Field>(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Vec<T>>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    // Off-diagonals below eps * ||T|| are at the level of the Householder
    // backward error, so deflating them costs no accuracy. Without this a
    // tight cluster of tiny eigenvalues can stall the relative test.
    let floor = f64::EPSILON * d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > tol::QL_MAX_ITER {
                return Err(Error::NoConvergence(format!(
                    "implicit QL exceeded {} iterations at index {l}",
                    tol::QL_MAX_ITER
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = a.scale(s) + f.scale(c);
                        *a = a.scale(c) - f.scale(s);
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
