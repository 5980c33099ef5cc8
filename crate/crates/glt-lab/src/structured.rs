//! Structured matrices: multilevel block Toeplitz, circulant, omega-circulant,
//! tau, Hankel and diagonal sampling, plus FFT-based products.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{C64, Matrix};
use crate::symbols::TrigPolynomial;

/// Multi-index `n = (n_1, ..., n_d)` with positive entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Result<Self> {
        if components.is_empty() || components.contains(&0) {
            return Err(Error::InvalidParameter(format!("multi-index {components:?} must be nonempty and positive")));
        }
        Ok(Self(components))
    }

    pub fn uni(n: usize) -> Self {
        Self::new(vec![n]).expect("positive size")
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// `N(n) = prod n_i`.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// Multi-index of linear position `lin` (0-based, lexicographic).
    pub fn unravel(&self, mut lin: usize) -> Vec<usize> {
        let mut out = vec![0; self.d()];
        for l in (0..self.d()).rev() {
            out[l] = lin % self.0[l];
            lin /= self.0[l];
        }
        out
    }
}

type SamplingEval = dyn Fn(&[f64]) -> Matrix + Send + Sync;

/// Function `a: [0,1]^d -> C^{r x r}` sampled by [`diagonal_sampling`].
#[derive(Clone)]
pub struct SamplingFn {
    d: usize,
    r: usize,
    eval: Arc<SamplingEval>,
}

impl SamplingFn {
    pub fn new(d: usize, r: usize, f: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static) -> Self {
        Self { d, r, eval: Arc::new(f) }
    }

    pub fn scalar(d: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(d, 1, move |x| Matrix::from_real_diag(&[f(x)]))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn eval(&self, x: &[f64]) -> Matrix {
        (self.eval)(x)
    }
}

/// `J_n^{(k)}`: ones where `i - j = k`. Zero matrix when `|k| >= n`.
pub fn shift_matrix(n: usize, k: i64) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        if i as i64 - j as i64 == k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `sum_k (J^{(k_1)} (x) ... (x) J^{(k_d)}) (x) F_k`: spatial index outer,
/// `r x r` block inner. Coefficients outside `(-n, n)` are ignored.
pub fn toeplitz(n: &MultiIndex, p: &TrigPolynomial) -> Result<Matrix> {
    if n.d() != p.d() {
        return Err(Error::Shape(format!("multi-index with d = {} for a polynomial with d = {}", n.d(), p.d())));
    }
    let r = p.r();
    let big = n.total();
    let dims = n.components();
    let mut out = Matrix::zeros(big * r, big * r);
    let mut dropped = 0;
    for (k, block) in p.iter() {
        if k.iter().zip(dims).any(|(&ki, &ni)| ki.unsigned_abs() as usize >= ni) {
            dropped += 1;
            continue;
        }
        for row in 0..big {
            let i = n.unravel(row);
            // Column multi-index j = i - k, if in range.
            let mut col = 0usize;
            let mut ok = true;
            for l in 0..dims.len() {
                let j = i[l] as i64 - k[l];
                if j < 0 || j >= dims[l] as i64 {
                    ok = false;
                    break;
                }
                col = col * dims[l] + j as usize;
            }
            if !ok {
                continue;
            }
            for a in 0..r {
                for b in 0..r {
                    out[(row * r + a, col * r + b)] += block[(a, b)];
                }
            }
        }
    }
    if dropped > 0 {
        warn!("toeplitz: {dropped} coefficient(s) outside the matrix size were ignored");
    }
    Ok(out)
}

/// Entries `a_{(i-j) mod n}`.
pub fn circulant(first_column: &[C64]) -> Matrix {
    let n = first_column.len();
    Matrix::from_fn(n, n, |i, j| first_column[(i + n - j) % n])
}

fn is_pow2(n: usize) -> bool {
    n > 0 && n & (n - 1) == 0
}

/// In-place iterative radix-2 FFT computing `y_j = sum_k x_k e^{sign i 2 pi jk/n}`.
/// `n` must be a power of two.
pub fn fft_in_place(x: &mut [C64], sign: f64) {
    let n = x.len();
    assert!(is_pow2(n) || n == 0, "radix-2 FFT needs a power-of-two length");
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            x.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles computed directly rather than by recurrence.
        let w: Vec<C64> = (0..half)
            .map(|j| C64::from_polar(1.0, sign * 2.0 * PI * j as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for j in 0..half {
                let u = x[start + j];
                let v = x[start + j + half] * w[j];
                x[start + j] = u + v;
                x[start + j + half] = u - v;
            }
        }
        len <<= 1;
    }
}

fn dft(x: &[C64], sign: f64) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &a)| a * C64::from_polar(1.0, sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// `y_j = sum_k x_k e^{sign i 2 pi jk/n}`; radix-2 FFT for powers of two, direct sum otherwise.
pub fn dft_any(x: &[C64], sign: f64) -> Vec<C64> {
    if is_pow2(x.len()) {
        let mut y = x.to_vec();
        fft_in_place(&mut y, sign);
        y
    } else {
        dft(x, sign)
    }
}

/// `lambda_j = sum_k a_k e^{i k 2 pi j / n}`.
pub fn circulant_eigenvalues(first_column: &[C64]) -> Vec<C64> {
    dft_any(first_column, 1.0)
}

/// Circulant times vector via FFT (dense product for non-power-of-two orders).
pub fn circulant_matvec(first_column: &[C64], x: &[C64]) -> Result<Vec<C64>> {
    let n = first_column.len();
    if x.len() != n {
        return Err(Error::Shape(format!("circulant of order {n} times vector of length {}", x.len())));
    }
    if !is_pow2(n) {
        return circulant(first_column).matvec(x);
    }
    let mut a = first_column.to_vec();
    let mut y = x.to_vec();
    fft_in_place(&mut a, -1.0);
    fft_in_place(&mut y, -1.0);
    for (yi, ai) in y.iter_mut().zip(&a) {
        *yi *= ai;
    }
    fft_in_place(&mut y, 1.0);
    let s = 1.0 / n as f64;
    Ok(y.into_iter().map(|z| z * s).collect())
}

/// `T_n(p) x` by embedding into a circulant of order `2^m >= 2n - 1`.
pub fn toeplitz_matvec(n: usize, p: &TrigPolynomial, x: &[C64]) -> Result<Vec<C64>> {
    if p.d() != 1 || p.r() != 1 {
        return Err(Error::InvalidParameter("toeplitz_matvec needs a scalar univariate polynomial".into()));
    }
    if x.len() != n {
        return Err(Error::Shape(format!("order {n} times vector of length {}", x.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = (2 * n - 1).next_power_of_two();
    let mut c = vec![C64::new(0.0, 0.0); m];
    for (k, b) in p.iter() {
        let k = k[0];
        if k.unsigned_abs() as usize >= n {
            continue;
        }
        let idx = if k >= 0 { k as usize } else { m - k.unsigned_abs() as usize };
        c[idx] += b[(0, 0)];
    }
    let mut xx = x.to_vec();
    xx.resize(m, C64::new(0.0, 0.0));
    let mut y = circulant_matvec(&c, &xx)?;
    y.truncate(n);
    Ok(y)
}

/// `sum_k a_k (Z^omega)^k`: entries `a_{i-j}` on and below the diagonal,
/// `omega a_{n+i-j}` strictly above.
pub fn omega_circulant(omega: C64, coeffs: &[C64]) -> Result<Matrix> {
    if omega.norm() == 0.0 {
        return Err(Error::InvalidParameter("omega must be nonzero".into()));
    }
    let n = coeffs.len();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i >= j {
            coeffs[i - j]
        } else {
            omega * coeffs[n + i - j]
        }
    }))
}

/// Eigenvalues `sum_k omega^{k/n} a_k e^{i k 2 pi j / n}` (principal root).
pub fn omega_circulant_eigenvalues(omega: C64, coeffs: &[C64]) -> Result<Vec<C64>> {
    if omega.norm() == 0.0 {
        return Err(Error::InvalidParameter("omega must be nonzero".into()));
    }
    let n = coeffs.len();
    let scaled: Vec<C64> =
        coeffs.iter().enumerate().map(|(k, &a)| a * omega.powf(k as f64 / n as f64)).collect();
    Ok(circulant_eigenvalues(&scaled))
}

/// `Q_n = sqrt(2/(n+1)) [sin(r s pi / (n+1))]`, symmetric and orthogonal.
pub fn dst_matrix(n: usize) -> Matrix {
    let s = (2.0 / (n as f64 + 1.0)).sqrt();
    Matrix::from_fn(n, n, |r, c| {
        C64::new(s * ((r + 1) as f64 * (c + 1) as f64 * PI / (n as f64 + 1.0)).sin(), 0.0)
    })
}

/// `W_n = tridiag(1, 0, 1)`.
pub fn tau_generator(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| C64::new(if i.abs_diff(j) == 1 { 1.0 } else { 0.0 }, 0.0))
}

/// `sum_k a_k W_n^k`.
pub fn tau_matrix(coeffs: &[C64]) -> Matrix {
    let n = coeffs.len();
    let w = tau_generator(n);
    let mut power = Matrix::identity(n);
    let mut out = Matrix::zeros(n, n);
    for (k, &a) in coeffs.iter().enumerate() {
        if k > 0 {
            power = power.matmul(&w).expect("square");
        }
        out = &out + &power.scale_c(a);
    }
    out
}

/// Eigenvalues of a tau matrix from its first column `s`, ordered to match
/// the columns of [`dst_matrix`]: `lambda_j = (Q s)_j / Q_{j,1}`.
pub fn tau_eigenvalues(first_column: &[C64]) -> Vec<C64> {
    let n = first_column.len();
    let q = dst_matrix(n);
    let qs = q.matvec(first_column).expect("matching length");
    (0..n).map(|j| qs[j] / q[(j, 0)]).collect()
}

/// Hankel matrix with entries `a_{i+j}` from `coeffs = (a_2, ..., a_{2n})`.
pub fn hankel(n: usize, coeffs: &[C64]) -> Result<Matrix> {
    if coeffs.len() != 2 * n - 1 {
        return Err(Error::Shape(format!("Hankel of order {n} needs {} coefficients, got {}", 2 * n - 1, coeffs.len())));
    }
    Ok(Matrix::from_fn(n, n, |i, j| coeffs[i + j]))
}

/// Block diagonal with blocks `a(i/n)`, `i = 1..n` in lexicographic order.
pub fn diagonal_sampling(n: &MultiIndex, a: &SamplingFn) -> Result<Matrix> {
    if n.d() != a.d() {
        return Err(Error::Shape(format!("multi-index with d = {} for a function of {} variables", n.d(), a.d())));
    }
    let r = a.r();
    let big = n.total();
    let mut out = Matrix::zeros(big * r, big * r);
    for lin in 0..big {
        let i = n.unravel(lin);
        let x: Vec<f64> = i.iter().zip(n.components()).map(|(&ii, &nn)| (ii + 1) as f64 / nn as f64).collect();
        let b = a.eval(&x);
        if b.rows() != r || b.cols() != r {
            return Err(Error::Shape("sampling function returned a block of the wrong order".into()));
        }
        for p in 0..r {
            for q in 0..r {
                out[(lin * r + p, lin * r + q)] = b[(p, q)];
            }
        }
    }
    Ok(out)
}
