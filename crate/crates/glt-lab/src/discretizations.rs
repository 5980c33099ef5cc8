//! Concrete matrix families: variable-coefficient fourth-order finite
//! differences, B-spline stiffness and mass symbols, and the Curie-Weiss
//! Hamiltonian in full and restricted form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, C64, Matrix};
use crate::structured::{toeplitz, MultiIndex};
use crate::symbols::{SymbolFn, TrigPolynomial};
use crate::tol;

/// Fourth-order variable-coefficient finite differences on `(0, 1)`:
/// `B_n = D^+ K^+ + D K + D^- K^-` with `h = 1/(n+3)`, nodes `x_i = i h` and
/// `D^+, D, D^- = diag alpha(x_{i+2}), alpha(x_{i+1}), alpha(x_i)`. No `h^4`
/// scaling, so `alpha = 1` gives the stencil `(1, -4, 6, -4, 1)`.
pub fn fd4_matrix(n: usize, alpha: impl Fn(f64) -> f64) -> Matrix {
    let h = 1.0 / (n as f64 + 3.0);
    let mut b = Matrix::zeros(n, n);
    // Row i (0-based) corresponds to node index i + 1.
    let set = |b: &mut Matrix, i: usize, j: i64, v: f64| {
        if j >= 0 && (j as usize) < n {
            b[(i, j as usize)] += C64::new(v, 0.0);
        }
    };
    for i in 0..n {
        let ii = i as i64;
        let node = (i + 1) as f64;
        let dp = alpha((node + 2.0) * h);
        let d0 = alpha((node + 1.0) * h);
        let dm = alpha(node * h);
        // K^+ = T(1 - 2e^{-i theta} + e^{-2i theta}): upper bands.
        set(&mut b, i, ii, dp);
        set(&mut b, i, ii + 1, -2.0 * dp);
        set(&mut b, i, ii + 2, dp);
        // K = T(4 - 4 cos theta).
        set(&mut b, i, ii - 1, -2.0 * d0);
        set(&mut b, i, ii, 4.0 * d0);
        set(&mut b, i, ii + 1, -2.0 * d0);
        // K^- = T(1 - 2e^{i theta} + e^{2i theta}): lower bands.
        set(&mut b, i, ii, dm);
        set(&mut b, i, ii - 1, -2.0 * dm);
        set(&mut b, i, ii - 2, dm);
    }
    b
}

/// `B_{n1}(alpha) (x) I_{n2} + I_{n1} (x) B_{n2}(alpha)`.
pub fn fd4_matrix_2d(n1: usize, n2: usize, alpha: impl Fn(f64) -> f64 + Copy) -> Matrix {
    let b1 = fd4_matrix(n1, alpha);
    let b2 = fd4_matrix(n2, alpha);
    &kron(&b1, &Matrix::identity(n2)) + &kron(&Matrix::identity(n1), &b2)
}

/// Symbol `(2 - 2 cos theta)^2` as a trigonometric polynomial.
pub fn bilaplacian_poly() -> TrigPolynomial {
    TrigPolynomial::scalar(&[(0, 6.0), (1, -4.0), (-1, -4.0), (2, 1.0), (-2, 1.0)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsplineKind {
    QuadraticC0,
    CubicC1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsplineWhich {
    Stiffness,
    Mass,
    Sum,
}

fn rows2(a: [[f64; 2]; 2], s: f64) -> Matrix {
    Matrix::from_real_rows(&[&a[0], &a[1]]).scale(s)
}

/// Generating function of the normalized stiffness (`f`), mass (`h`) or
/// combined (`f + h`) B-spline matrices, with `2 x 2` blocks.
pub fn bspline_symbol(kind: BsplineKind, which: BsplineWhich) -> TrigPolynomial {
    let (f, h) = match kind {
        BsplineKind::QuadraticC0 => {
            let s = 1.0 / 3.0;
            let f1 = rows2([[0.0, -2.0], [0.0, -2.0]], s);
            let f0 = rows2([[4.0, -2.0], [-2.0, 8.0]], s);
            let t = 1.0 / 30.0;
            let h1 = rows2([[0.0, 3.0], [0.0, 1.0]], t);
            let h0 = rows2([[4.0, 3.0], [3.0, 12.0]], t);
            (
                TrigPolynomial::blocks(2, vec![(0, f0), (-1, f1.adjoint()), (1, f1)]).unwrap(),
                TrigPolynomial::blocks(2, vec![(0, h0), (-1, h1.adjoint()), (1, h1)]).unwrap(),
            )
        }
        BsplineKind::CubicC1 => {
            let s = 1.0 / 40.0;
            let f1 = rows2([[-15.0, -15.0], [-3.0, -15.0]], s);
            let f0 = rows2([[48.0, 0.0], [0.0, 48.0]], s);
            let t = 1.0 / 560.0;
            let h1 = rows2([[9.0, 53.0], [1.0, 9.0]], t);
            let h0 = rows2([[128.0, 80.0], [80.0, 128.0]], t);
            (
                TrigPolynomial::blocks(2, vec![(0, f0), (-1, f1.adjoint()), (1, f1)]).unwrap(),
                TrigPolynomial::blocks(2, vec![(0, h0), (-1, h1.adjoint()), (1, h1)]).unwrap(),
            )
        }
    };
    match which {
        BsplineWhich::Stiffness => f,
        BsplineWhich::Mass => h,
        BsplineWhich::Sum => f.add(&h).expect("same shape"),
    }
}

/// `T_n` of the B-spline generating function: a `2n x 2n` Hermitian matrix.
/// Boundary corrections of the assembled matrices are not included.
pub fn bspline_toeplitz(kind: BsplineKind, which: BsplineWhich, n: usize) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::InvalidParameter("B-spline matrices need n >= 2".into()));
    }
    toeplitz(&MultiIndex::uni(n), &bspline_symbol(kind, which))
}

/// Curie-Weiss parameters: coupling `gamma`, transverse field `b`, `n` spins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CWParams {
    pub gamma: f64,
    pub b: f64,
    pub n: usize,
}

impl CWParams {
    pub fn new(gamma: f64, b: f64, n: usize) -> Result<Self> {
        if !(gamma > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("need gamma > 0 and finite B, got {gamma}, {b}")));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("need at least one spin".into()));
        }
        Ok(Self { gamma, b, n })
    }
}

/// Node placement for the restricted Curie-Weiss matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CwConvention {
    /// `x_k = (k + 1/2)/(N + 1)`, `k = 0..N`, with off-diagonals
    /// `-B sqrt(s(x_k) s(x_{k+1}))`, `s(x) = sqrt(x(1 - x))`.
    #[default]
    Midpoint,
    /// `x_k = k/N` with off-diagonals `-B sqrt(1 - k/N) sqrt((k+1)/N)`.
    SpinBasis,
}

/// Restricted Curie-Weiss matrix of order `N + 1`, real symmetric tridiagonal.
pub fn curie_weiss_restricted(p: &CWParams, conv: CwConvention) -> Matrix {
    let n = p.n;
    let g = p.gamma;
    let m = n + 1;
    let mut h = Matrix::zeros(m, m);
    let s = |x: f64| (x * (1.0 - x)).max(0.0).sqrt();
    for k in 0..m {
        let x = match conv {
            CwConvention::Midpoint => (k as f64 + 0.5) / m as f64,
            CwConvention::SpinBasis => k as f64 / n as f64,
        };
        h[(k, k)] = C64::new(-0.5 * g * (2.0 * x - 1.0).powi(2), 0.0);
        if k + 1 < m {
            let off = match conv {
                CwConvention::Midpoint => {
                    let y = (k as f64 + 1.5) / m as f64;
                    -p.b * (s(x) * s(y)).sqrt()
                }
                CwConvention::SpinBasis => {
                    -p.b * (1.0 - k as f64 / n as f64).sqrt() * ((k + 1) as f64 / n as f64).sqrt()
                }
            };
            h[(k, k + 1)] = C64::new(off, 0.0);
            h[(k + 1, k)] = C64::new(off, 0.0);
        }
    }
    h
}

/// `kappa(x, theta) = -(gamma/2)(2x - 1)^2 - 2B sqrt(x(1 - x)) cos theta`.
pub fn curie_weiss_symbol(gamma: f64, b: f64) -> SymbolFn {
    SymbolFn::scalar(1, move |x, t| {
        let x = x[0];
        -0.5 * gamma * (2.0 * x - 1.0).powi(2) - 2.0 * b * (x * (1.0 - x)).max(0.0).sqrt() * t[0].cos()
    })
}

/// Exact `(min, max)` of [`curie_weiss_symbol`] over `[0,1] x [-pi,pi]`.
pub fn curie_weiss_extremes(gamma: f64, b: f64) -> (f64, f64) {
    // With s = sqrt(1 - (2x-1)^2) in [0, 1] the symbol at theta = 0 is
    // (gamma/2)(s^2 - 1) - |B| s, and at theta = pi it is (gamma/2)(s^2 - 1) + |B| s.
    let bb = b.abs();
    let min = if bb / gamma <= 1.0 { -0.5 * gamma - bb * bb / (2.0 * gamma) } else { -bb };
    (min, bb)
}

/// Normalized full Hamiltonian `H / N` on `2^N` states, where
/// `H = -(gamma/(2N)) sum_{x,y} s3(x) s3(y) - B sum_x s1(x)`.
/// Basis state bit `x` set means spin `x` points down.
pub fn curie_weiss_full(p: &CWParams) -> Result<Matrix> {
    let n = p.n;
    if n > tol::CW_FULL_MAX_SPINS {
        return Err(Error::TooLarge(format!("{n} spins exceeds the limit of {}", tol::CW_FULL_MAX_SPINS)));
    }
    let dim = 1usize << n;
    let nf = n as f64;
    let mut h = Matrix::zeros(dim, dim);
    for state in 0..dim {
        let down = state.count_ones() as f64;
        let m = nf - 2.0 * down;
        h[(state, state)] = C64::new(-p.gamma / (2.0 * nf) * m * m / nf, 0.0);
        for x in 0..n {
            let other = state ^ (1 << x);
            h[(state, other)] = C64::new(-p.b / nf, 0.0);
        }
    }
    Ok(h)
}

/// Second-order finite differences for `-(a u')' + c u` on `N + 1` cells of
/// width `1/(N+1)`, with kinetic coefficient `a(x) = B sqrt(x(1-x))` taken at
/// the cell interfaces and potential `c(x) = -(gamma/2)(2x-1)^2 - 2B sqrt(x(1-x))`
/// at the cell centres. Its symbol `a(x)(2 - 2cos theta) + c(x)` equals
/// [`curie_weiss_symbol`].
pub fn schrodinger_fd(n: usize, gamma: f64, b: f64) -> Matrix {
    let m = n + 1;
    let s = |x: f64| (x * (1.0 - x)).max(0.0).sqrt();
    let a = |j: usize| b * s(j as f64 / m as f64);
    let c = |x: f64| -0.5 * gamma * (2.0 * x - 1.0).powi(2) - 2.0 * b * s(x);
    let mut h = Matrix::zeros(m, m);
    for k in 0..m {
        let x = (k as f64 + 0.5) / m as f64;
        h[(k, k)] = C64::new(a(k) + a(k + 1) + c(x), 0.0);
        if k + 1 < m {
            h[(k, k + 1)] = C64::new(-a(k + 1), 0.0);
            h[(k + 1, k)] = C64::new(-a(k + 1), 0.0);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvals_hermitian, HermitianMatrix};

    fn eigs(m: &Matrix) -> Vec<f64> {
        eigvals_hermitian(&HermitianMatrix::new(m.clone()).unwrap()).unwrap()
    }

    #[test]
    fn fd4_constant_coefficient_is_pentadiagonal() {
        let b = fd4_matrix(7, |_| 1.0);
        let t = toeplitz(&MultiIndex::uni(7), &bilaplacian_poly()).unwrap();
        assert_eq!(b, t);
    }

    #[test]
    fn fd4_hand_expansion_n3() {
        let b = fd4_matrix(3, |x| x).scale(6.0);
        let e = Matrix::from_real_rows(&[&[12.0, -10.0, 3.0], &[-10.0, 18.0, -14.0], &[3.0, -14.0, 24.0]]);
        assert!(b.max_abs_diff(&e) < 1e-13);
    }

    #[test]
    fn fd4_is_symmetric() {
        for n in [4, 9, 30] {
            let b = fd4_matrix(n, |x| x * x + 0.3);
            assert!(b.hermitian_defect() <= 1e-12);
        }
    }

    #[test]
    fn fd4_2d_spectrum_is_pairwise_sums() {
        let m = fd4_matrix_2d(3, 4, |_| 1.0);
        let l1 = eigs(&fd4_matrix(3, |_| 1.0));
        let l2 = eigs(&fd4_matrix(4, |_| 1.0));
        let mut sums: Vec<f64> = l1.iter().flat_map(|a| l2.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        for (x, y) in eigs(&m).iter().zip(&sums) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn bspline_quadratic_blocks() {
        let p = bspline_symbol(BsplineKind::QuadraticC0, BsplineWhich::Stiffness);
        let f0 = p.coeff(&[0]).unwrap();
        assert!(f0.max_abs_diff(&Matrix::from_real_rows(&[&[4.0, -2.0], &[-2.0, 8.0]]).scale(1.0 / 3.0)) < 1e-15);
        let f1 = p.coeff(&[1]).unwrap();
        assert!(f1.max_abs_diff(&Matrix::from_real_rows(&[&[0.0, -2.0], &[0.0, -2.0]]).scale(1.0 / 3.0)) < 1e-15);
        assert_eq!(p.coeff(&[-1]).unwrap(), &f1.adjoint());
        assert!(p.is_hermitian());
    }

    #[test]
    fn bspline_symbols_match_closed_forms() {
        let i = C64::new(0.0, 1.0);
        for &t in &[-2.5, -0.3, 0.0, 1.1, 3.0] {
            let e = C64::from_polar(1.0, t);
            let ec = e.conj();
            let c = t.cos();
            let f = bspline_symbol(BsplineKind::CubicC1, BsplineWhich::Stiffness).eval(&[t]);
            assert!((f[(0, 0)].re - (48.0 - 30.0 * c) / 40.0).abs() < 1e-14);
            assert!((f[(0, 1)] - (e * -15.0 - ec * 3.0) / 40.0).norm() < 1e-14);
            assert!((f[(1, 0)] - (e * -3.0 - ec * 15.0) / 40.0).norm() < 1e-14);
            let h = bspline_symbol(BsplineKind::CubicC1, BsplineWhich::Mass).eval(&[t]);
            assert!((h[(0, 0)].re - (128.0 + 18.0 * c) / 560.0).abs() < 1e-14);
            assert!((h[(0, 1)] - (e * 53.0 + ec + 80.0) / 560.0).norm() < 1e-14);
            let h = bspline_symbol(BsplineKind::QuadraticC0, BsplineWhich::Mass).eval(&[t]);
            assert!((h[(1, 1)].re - (12.0 + 2.0 * c) / 30.0).abs() < 1e-14);
            assert!((h[(0, 1)] - (e * 3.0 + 3.0) / 30.0).norm() < 1e-14);
            let _ = i;
        }
    }

    #[test]
    fn bspline_mass_is_positive_definite() {
        for kind in [BsplineKind::QuadraticC0, BsplineKind::CubicC1] {
            for n in [2, 10, 80] {
                let m = bspline_toeplitz(kind, BsplineWhich::Mass, n).unwrap();
                assert_eq!(m.hermitian_defect(), 0.0);
                assert!(eigs(&m)[0] > 0.0);
            }
        }
        assert!(bspline_toeplitz(BsplineKind::CubicC1, BsplineWhich::Sum, 1).is_err());
    }

    #[test]
    fn cw_restricted_without_field_is_diagonal() {
        let p = CWParams::new(1.0, 0.0, 10).unwrap();
        for conv in [CwConvention::Midpoint, CwConvention::SpinBasis] {
            let h = curie_weiss_restricted(&p, conv);
            let l = eigs(&h);
            assert!(l[0] >= -0.5 - 1e-15 && l[l.len() - 1] <= 0.0);
        }
        let h = curie_weiss_restricted(&p, CwConvention::SpinBasis);
        assert_eq!(h[(0, 0)].re, -0.5);
    }

    #[test]
    fn cw_restricted_spectrum_inside_symbol_range() {
        for &(g, b) in &[(1.0, 1.0), (1.0, 0.5)] {
            let (lo, hi) = curie_weiss_extremes(g, b);
            for n in [39, 79, 159] {
                let l = eigs(&curie_weiss_restricted(&CWParams::new(g, b, n).unwrap(), CwConvention::Midpoint));
                assert!(l[0] >= lo && l[l.len() - 1] <= hi);
            }
        }
    }

    #[test]
    fn cw_extremes_closed_form() {
        assert_eq!(curie_weiss_extremes(1.0, 1.0), (-1.0, 1.0));
        assert_eq!(curie_weiss_extremes(1.0, 0.5), (-0.625, 0.5));
        assert_eq!(curie_weiss_extremes(2.0, 0.0), (-1.0, 0.0));
        // Brute-force check on a fine grid.
        for &(g, b) in &[(1.0, 0.3), (0.7, 1.4)] {
            let k = curie_weiss_symbol(g, b);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..=2000 {
                for &t in &[0.0, std::f64::consts::PI] {
                    let v = k.eval(&[i as f64 / 2000.0], &[t]).unwrap()[(0, 0)].re;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            let (m, mm) = curie_weiss_extremes(g, b);
            assert!((lo - m).abs() < 1e-5 && (hi - mm).abs() < 1e-5);
        }
    }

    #[test]
    fn cw_full_single_spin() {
        let h = curie_weiss_full(&CWParams::new(1.0, 1.0, 1).unwrap()).unwrap();
        let l = eigs(&h);
        assert!((l[0] + 1.5).abs() < 1e-14 && (l[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn cw_full_two_spins_without_field() {
        let h = curie_weiss_full(&CWParams::new(1.0, 0.0, 2).unwrap()).unwrap();
        let l = eigs(&h);
        let expect = [-0.5, -0.5, 0.0, 0.0];
        for (x, y) in l.iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn cw_full_trace_and_guard() {
        for n in 1..=11usize {
            let h = curie_weiss_full(&CWParams::new(1.3, 0.7, n).unwrap()).unwrap();
            let nf = n as f64;
            let expect = -(1.3 / (2.0 * nf * nf)) * nf * (1u64 << n) as f64;
            assert!((h.trace().re - expect).abs() <= 1e-12 * expect.abs());
            assert_eq!(h.hermitian_defect(), 0.0);
        }
        assert!(matches!(curie_weiss_full(&CWParams::new(1.0, 1.0, 15).unwrap()), Err(Error::TooLarge(_))));
    }

    #[test]
    fn schrodinger_without_field_is_potential() {
        let h = schrodinger_fd(9, 1.0, 0.0);
        for k in 0..10 {
            let x = (k as f64 + 0.5) / 10.0;
            assert!((h[(k, k)].re + 0.5 * (2.0 * x - 1.0).powi(2)).abs() < 1e-15);
        }
        assert_eq!(h.max_abs_diff(&Matrix::from_real_diag(&h.diag().iter().map(|z| z.re).collect::<Vec<_>>())), 0.0);
    }
}
