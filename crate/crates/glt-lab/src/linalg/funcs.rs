use super::eig::{eig_hermitian_with, eigvals_hermitian, EigMethod};
use super::matrix::{C64, HermitianMatrix, Matrix};
use crate::error::{Error, Result};
use crate::tol;
use rayon::prelude::*;

/// Scalar function applied to the spectrum of a Hermitian matrix.
#[derive(Clone, Copy, Debug)]
pub enum ScalarFn {
    Sqrt,
    InvSqrt,
    Log,
    Exp,
    Inverse,
    /// `x^p`. Positive `p` accepts a semidefinite spectrum.
    Pow(f64),
    Custom(fn(f64) -> f64),
}

impl ScalarFn {
    fn name(self) -> &'static str {
        match self {
            ScalarFn::Sqrt => "sqrt",
            ScalarFn::InvSqrt => "inverse sqrt",
            ScalarFn::Log => "log",
            ScalarFn::Exp => "exp",
            ScalarFn::Inverse => "inverse",
            ScalarFn::Pow(_) => "power",
            ScalarFn::Custom(_) => "custom function",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            ScalarFn::Sqrt => x.sqrt(),
            ScalarFn::InvSqrt => 1.0 / x.sqrt(),
            ScalarFn::Log => x.ln(),
            ScalarFn::Exp => x.exp(),
            ScalarFn::Inverse => 1.0 / x,
            ScalarFn::Pow(p) => x.powf(p),
            ScalarFn::Custom(f) => f(x),
        }
    }

    /// Check the spectrum against the domain; returns the clamped spectrum.
    fn admit(self, lambda: &[f64]) -> Result<Vec<f64>> {
        let lmin = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let radius = lambda.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = || Error::Domain { function: self.name(), lambda_min: lmin };
        match self {
            ScalarFn::InvSqrt | ScalarFn::Log | ScalarFn::Inverse => {
                if lambda.is_empty() || lmin > 0.0 {
                    Ok(lambda.to_vec())
                } else {
                    Err(err())
                }
            }
            ScalarFn::Pow(p) if p < 0.0 => {
                if lambda.is_empty() || lmin > 0.0 {
                    Ok(lambda.to_vec())
                } else {
                    Err(err())
                }
            }
            ScalarFn::Sqrt | ScalarFn::Pow(_) => {
                if lambda.is_empty() || lmin >= -tol::PSD_CLAMP * radius {
                    Ok(lambda.iter().map(|&x| x.max(0.0)).collect())
                } else {
                    Err(err())
                }
            }
            ScalarFn::Exp | ScalarFn::Custom(_) => Ok(lambda.to_vec()),
        }
    }
}

/// `V diag(f(lambda)) V*`.
pub fn hpd_function(a: &HermitianMatrix, f: ScalarFn) -> Result<HermitianMatrix> {
    hpd_function_with(a, f, EigMethod::Auto)
}

/// [`hpd_function`] with an explicit eigensolver. Jacobi keeps small
/// eigenvalues of graded matrices to high relative accuracy.
pub fn hpd_function_with(a: &HermitianMatrix, f: ScalarFn, method: EigMethod) -> Result<HermitianMatrix> {
    let e = eig_hermitian_with(a, method)?;
    let lambda = f.admit(&e.eigenvalues)?;
    let d: Vec<C64> = lambda.iter().map(|&x| C64::new(f.apply(x), 0.0)).collect();
    let w = e.eigenvectors.scale_cols(&d);
    Ok(HermitianMatrix::from_hermitian_part(&w.matmul(&e.eigenvectors.adjoint())?))
}

/// Lower-triangular `L` with positive diagonal and `A = L L*`.
pub fn cholesky(a: &HermitianMatrix) -> Result<Matrix> {
    let n = a.order();
    if a.is_real() {
        let l = cholesky_real(n, &a.data().iter().map(|z| z.re).collect::<Vec<_>>())?;
        return Matrix::from_vec(n, n, l.into_iter().map(|x| C64::new(x, 0.0)).collect());
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)].re;
        for k in 0..j {
            s -= l[(j, k)].norm_sqr();
        }
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let ljj = s.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

fn cholesky_real(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0f64; n * n];
    for j in 0..n {
        let rj = &l[j * n..j * n + j];
        let s = a[j * n + j] - rj.iter().map(|x| x * x).sum::<f64>();
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let ljj = s.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let (head, tail) = l.split_at_mut(i * n);
            let rj = &head[j * n..j * n + j];
            let dot: f64 = tail[..j].iter().zip(rj).map(|(x, y)| x * y).sum();
            tail[j] = (a[i * n + j] - dot) / ljj;
        }
    }
    Ok(l)
}

/// Solve `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = l.rows();
    if !l.is_square() || b.rows() != n {
        return Err(Error::Shape(format!("triangular solve {}x{} with {} rows", n, l.cols(), b.rows())));
    }
    let m = b.cols();
    if l.is_real() && b.is_real() {
        return solve_lower_real(l, b);
    }
    let mut x = b.clone().into_data();
    for i in 0..n {
        let lii = l[(i, i)];
        if lii.norm() == 0.0 {
            return Err(Error::NotPositiveDefinite { index: i, pivot: 0.0 });
        }
        let (done, rest) = x.split_at_mut(i * m);
        let xi = &mut rest[..m];
        for (k, &lik) in l.row(i)[..i].iter().enumerate() {
            if lik.re == 0.0 && lik.im == 0.0 {
                continue;
            }
            for (a, b) in xi.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                *a -= lik * b;
            }
        }
        let inv = lii.inv();
        for a in xi.iter_mut() {
            *a *= inv;
        }
    }
    let x = Matrix::from_vec(n, m, x)?;
    Ok(x)
}

/// Real forward substitution, one right-hand side per task.
fn solve_lower_real(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    let (n, m) = (l.rows(), b.cols());
    let lr: Vec<f64> = l.data().iter().map(|z| z.re).collect();
    if (0..n).any(|i| lr[i * n + i] == 0.0) {
        let i = (0..n).find(|&i| lr[i * n + i] == 0.0).unwrap_or(0);
        return Err(Error::NotPositiveDefinite { index: i, pivot: 0.0 });
    }
    // Columns of B, stored contiguously.
    let mut cols = vec![0.0f64; n * m];
    for (i, row) in b.data().chunks(m.max(1)).enumerate() {
        for (j, z) in row.iter().enumerate() {
            cols[j * n + i] = z.re;
        }
    }
    cols.par_chunks_mut(n.max(1)).for_each(|x| {
        for i in 0..n {
            let row = &lr[i * n..i * n + i];
            let dot: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / lr[i * n + i];
        }
    });
    Ok(Matrix::from_fn(n, m, |i, j| C64::new(cols[j * n + i], 0.0)))
}

/// `L^{-1} A L^{-*}` for lower-triangular `L`, symmetrized.
pub fn whiten(l: &Matrix, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let y = solve_lower(l, a)?;
    let z = solve_lower(l, &y.adjoint())?;
    Ok(HermitianMatrix::from_hermitian_part(&z))
}

/// Schatten p-norm, `p` in `[1, inf]`.
pub fn schatten_norm(a: &Matrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Schatten exponent {p} < 1")));
    }
    if !a.is_square() {
        return Err(Error::Shape(format!("{}x{} matrix", a.rows(), a.cols())));
    }
    if p == 2.0 {
        return Ok(a.frobenius());
    }
    let sv = singular_values(a)?;
    Ok(lp_norm(&sv, p))
}

/// Singular values, descending. Hermitian input uses `|eigenvalues|`.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    let herm = a.hermitian_defect() <= tol::HERMITIAN * (1.0 + a.max_abs());
    let mut sv: Vec<f64> = if herm {
        eigvals_hermitian(&HermitianMatrix::from_hermitian_part(a))?
            .into_iter()
            .map(f64::abs)
            .collect()
    } else {
        let g = HermitianMatrix::from_hermitian_part(&a.adjoint().matmul(a)?);
        eigvals_hermitian(&g)?.into_iter().map(|x| x.max(0.0).sqrt()).collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Kronecker product with the standard block layout.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = Matrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}
