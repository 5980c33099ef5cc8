use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const PAR_MIN_ROWS: usize = 64;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self + s * I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.data[i * self.cols + i] += s;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.diag().iter().sum()
    }

    /// `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i..n {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Dense product. Rows are computed in parallel; each row is sequential,
    /// so the result does not depend on the thread count.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = Matrix::zeros(n, m);
        if n == 0 || m == 0 {
            return Ok(out);
        }
        if self.is_real() && other.is_real() {
            let a: Vec<f64> = self.data.iter().map(|z| z.re).collect();
            let b: Vec<f64> = other.data.iter().map(|z| z.re).collect();
            let mut c = vec![0.0f64; n * m];
            let kernel = |(i, crow): (usize, &mut [f64])| {
                for p in 0..k {
                    let aip = a[i * k + p];
                    if aip == 0.0 {
                        continue;
                    }
                    let brow = &b[p * m..(p + 1) * m];
                    for (cj, bj) in crow.iter_mut().zip(brow) {
                        *cj += aip * bj;
                    }
                }
            };
            if n >= PAR_MIN_ROWS {
                c.par_chunks_mut(m).enumerate().for_each(kernel);
            } else {
                c.chunks_mut(m).enumerate().for_each(kernel);
            }
            for (o, x) in out.data.iter_mut().zip(c) {
                o.re = x;
            }
            return Ok(out);
        }
        let a = &self.data;
        let b = &other.data;
        let kernel = |(i, crow): (usize, &mut [C64])| {
            for p in 0..k {
                let aip = a[i * k + p];
                if aip.re == 0.0 && aip.im == 0.0 {
                    continue;
                }
                let brow = &b[p * m..(p + 1) * m];
                for (cj, bj) in crow.iter_mut().zip(brow) {
                    *cj += aip * bj;
                }
            }
        };
        if n >= PAR_MIN_ROWS {
            out.data.par_chunks_mut(m).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(m).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::Shape(format!("{} columns, vector of length {}", self.cols, x.len())));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[C64]) -> Matrix {
        assert_eq!(d.len(), self.rows);
        let mut m = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for z in &mut m.data[i * self.cols..(i + 1) * self.cols] {
                *z *= s;
            }
        }
        m
    }

    /// `self * diag(d)`.
    pub fn scale_cols(&self, d: &[C64]) -> Matrix {
        assert_eq!(d.len(), self.cols);
        let mut m = self.clone();
        for row in m.data.chunks_mut(self.cols) {
            for (z, &s) in row.iter_mut().zip(d) {
                *z *= s;
            }
        }
        m
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(C64, C64) -> C64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "elementwise operation on different shapes"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Panics on incompatible shapes; use [`Matrix::matmul`] for a checked product.
impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("incompatible shapes in product")
    }
}

/// Square complex matrix known to be Hermitian within [`tol::HERMITIAN`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(Matrix);

impl HermitianMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(format!(
                "{}x{} matrix is not square",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermitian_defect();
        let bound = tol::HERMITIAN * (1.0 + m.max_abs());
        if !(defect <= bound) {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {defect:e} > {bound:e})"
            )));
        }
        Ok(Self(m))
    }

    /// Hermitian part `(M + M*) / 2`, without any check on `M`.
    pub fn from_hermitian_part(m: &Matrix) -> Self {
        assert!(m.is_square(), "Hermitian part of a non-square matrix");
        let n = m.rows();
        let mut h = m.clone();
        for i in 0..n {
            h[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        Self(h)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self(Matrix::from_real_diag(d))
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `self + s * I`.
    pub fn shift(&self, s: f64) -> Self {
        Self(self.0.shift(s))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `M* self M`, symmetrized.
    pub fn congruence(&self, m: &Matrix) -> Result<Self> {
        let t = m.adjoint().matmul(&self.0)?.matmul(m)?;
        Ok(Self::from_hermitian_part(&t))
    }
}

impl std::ops::Deref for HermitianMatrix {
    type Target = Matrix;
    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_hand_computation() {
        let a = Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let c = a.matmul(&b).unwrap();
        assert_eq!(c, Matrix::from_real_rows(&[&[2.0, 1.0], &[4.0, 3.0]]));
    }

    #[test]
    fn complex_product_uses_complex_path() {
        let i = C64::new(0.0, 1.0);
        let a = Matrix::from_vec(1, 1, vec![i]).unwrap();
        let c = a.matmul(&a).unwrap();
        assert_eq!(c[(0, 0)], C64::new(-1.0, 0.0));
    }

    #[test]
    fn hermitian_check_rejects_asymmetric() {
        let m = Matrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(HermitianMatrix::new(m).is_err());
        let rect = Matrix::zeros(2, 3);
        assert!(HermitianMatrix::new(rect).is_err());
    }

    #[test]
    fn hermitian_part_is_hermitian() {
        let m = Matrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let h = HermitianMatrix::from_hermitian_part(&m);
        assert_eq!(h.hermitian_defect(), 0.0);
    }

    #[test]
    fn shape_errors_are_reported() {
        let a = Matrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
        assert!(Matrix::from_vec(2, 2, vec![C64::new(0.0, 0.0); 3]).is_err());
    }
}
