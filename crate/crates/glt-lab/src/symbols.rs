//! Matrix-valued symbols on `[0,1]^d x [-pi,pi]^d`: trigonometric
//! polynomials, closures, sampled grids and monotone rearrangements.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomean::alm_mean;
use crate::linalg::{eigvals_hermitian, C64, HermitianMatrix, Matrix};
use crate::tol;

/// Finite Fourier series `sum_k F_k e^{i k.theta}` with `r x r` blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    d: usize,
    r: usize,
    coeffs: BTreeMap<Vec<i64>, Matrix>,
}

impl TrigPolynomial {
    pub fn new(d: usize, r: usize) -> Self {
        assert!(d >= 1 && r >= 1, "levels and block order must be positive");
        Self { d, r, coeffs: BTreeMap::new() }
    }

    /// Scalar univariate polynomial from `(k, f_k)` pairs.
    pub fn scalar(coeffs: &[(i64, f64)]) -> Self {
        let mut p = Self::new(1, 1);
        for &(k, c) in coeffs {
            p.add_coeff(vec![k], Matrix::from_real_diag(&[c])).expect("1x1 block");
        }
        p
    }

    /// Scalar univariate polynomial with complex coefficients.
    pub fn scalar_complex(coeffs: &[(i64, C64)]) -> Self {
        let mut p = Self::new(1, 1);
        for &(k, c) in coeffs {
            p.add_coeff(vec![k], Matrix::from_vec(1, 1, vec![c]).unwrap()).expect("1x1 block");
        }
        p
    }

    /// Univariate polynomial with `r x r` blocks.
    pub fn blocks(r: usize, coeffs: Vec<(i64, Matrix)>) -> Result<Self> {
        let mut p = Self::new(1, r);
        for (k, b) in coeffs {
            p.add_coeff(vec![k], b)?;
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Adds `block` to the coefficient at `k`.
    pub fn add_coeff(&mut self, k: Vec<i64>, block: Matrix) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::Shape(format!("index of length {} for d = {}", k.len(), self.d)));
        }
        if block.rows() != self.r || block.cols() != self.r {
            return Err(Error::Shape(format!(
                "{}x{} block for r = {}",
                block.rows(),
                block.cols(),
                self.r
            )));
        }
        match self.coeffs.get_mut(&k) {
            Some(c) => *c = &*c + &block,
            None => {
                self.coeffs.insert(k, block);
            }
        }
        Ok(())
    }

    pub fn coeff(&self, k: &[i64]) -> Option<&Matrix> {
        self.coeffs.get(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Matrix)> {
        self.coeffs.iter()
    }

    /// Same polynomial acting on level `level` of a `d`-level space.
    pub fn embed(&self, d: usize, level: usize) -> Self {
        assert_eq!(self.d, 1, "only univariate polynomials can be embedded");
        assert!(level < d);
        let mut p = Self::new(d, self.r);
        for (k, b) in &self.coeffs {
            let mut kk = vec![0; d];
            kk[level] = k[0];
            p.add_coeff(kk, b.clone()).unwrap();
        }
        p
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.d, self.r) != (other.d, other.r) {
            return Err(Error::Shape("sum of polynomials of different shapes".into()));
        }
        let mut p = self.clone();
        for (k, b) in &other.coeffs {
            p.add_coeff(k.clone(), b.clone())?;
        }
        Ok(p)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            d: self.d,
            r: self.r,
            coeffs: self.coeffs.iter().map(|(k, b)| (k.clone(), b.scale(s))).collect(),
        }
    }

    /// `f (x) A` for a scalar polynomial `f` and an `r x r` block `A`.
    pub fn tensor_block(&self, a: &Matrix) -> Result<Self> {
        if self.r != 1 || !a.is_square() {
            return Err(Error::Shape("tensor_block needs a scalar polynomial and a square block".into()));
        }
        let mut p = Self::new(self.d, a.rows());
        for (k, b) in &self.coeffs {
            p.add_coeff(k.clone(), a.scale_c(b[(0, 0)]))?;
        }
        Ok(p)
    }

    /// True iff `F_{-k} = F_k^*` for every stored `k`.
    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().all(|(k, b)| {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            let mirrored = self.coeffs.get(&neg).cloned().unwrap_or_else(|| Matrix::zeros(self.r, self.r));
            let scale = 1.0 + b.max_abs();
            b.adjoint().max_abs_diff(&mirrored) <= tol::HERMITIAN * scale
        })
    }

    pub fn eval(&self, theta: &[f64]) -> Matrix {
        assert_eq!(theta.len(), self.d, "theta has the wrong dimension");
        let mut out = Matrix::zeros(self.r, self.r);
        for (k, b) in &self.coeffs {
            let phase: f64 = k.iter().zip(theta).map(|(&ki, &t)| ki as f64 * t).sum();
            let z = C64::from_polar(1.0, phase);
            for (o, x) in out.data_mut().iter_mut().zip(b.data()) {
                *o += x * z;
            }
        }
        out
    }
}

/// `sum_k F_k e^{i k.theta}`.
pub fn eval_trig(p: &TrigPolynomial, theta: &[f64]) -> Matrix {
    p.eval(theta)
}

type SymbolEval = dyn Fn(&[f64], &[f64]) -> Result<Matrix> + Send + Sync;

/// Matrix-valued symbol `(x, theta) -> r x r` Hermitian matrix.
#[derive(Clone)]
pub struct SymbolFn {
    d: usize,
    r: usize,
    eval: Arc<SymbolEval>,
}

impl std::fmt::Debug for SymbolFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolFn").field("d", &self.d).field("r", &self.r).finish()
    }
}

impl SymbolFn {
    pub fn new(
        d: usize,
        r: usize,
        eval: impl Fn(&[f64], &[f64]) -> Result<Matrix> + Send + Sync + 'static,
    ) -> Self {
        Self { d, r, eval: Arc::new(eval) }
    }

    /// Scalar symbol from a real function.
    pub fn scalar(d: usize, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(d, 1, move |x, t| Ok(Matrix::from_real_diag(&[f(x, t)])))
    }

    pub fn constant(d: usize, c: Matrix) -> Self {
        assert!(c.is_square());
        let r = c.rows();
        Self::new(d, r, move |_, _| Ok(c.clone()))
    }

    /// The generating function of a Toeplitz sequence, constant in `x`.
    pub fn from_trig(p: TrigPolynomial) -> Self {
        let (d, r) = (p.d(), p.r());
        Self::new(d, r, move |_, t| Ok(p.eval(t)))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn eval(&self, x: &[f64], theta: &[f64]) -> Result<Matrix> {
        (self.eval)(x, theta)
    }

    pub fn eval_hermitian(&self, x: &[f64], theta: &[f64]) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.eval(x, theta)?)
    }
}

/// Tensor grid sizes for sampling a symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolGrid {
    pub mx: Vec<usize>,
    pub mtheta: Vec<usize>,
}

impl SymbolGrid {
    pub fn new(mx: Vec<usize>, mtheta: Vec<usize>) -> Result<Self> {
        if mx.len() != mtheta.len() || mx.is_empty() {
            return Err(Error::Shape("grid needs one x size and one theta size per level".into()));
        }
        if mx.iter().chain(&mtheta).any(|&m| m == 0) {
            return Err(Error::InvalidParameter("grid sizes must be positive".into()));
        }
        Ok(Self { mx, mtheta })
    }

    /// About 2000 nodes: 40 x 50 for one level, 7^4 for two.
    pub fn default_for(d: usize) -> Self {
        match d {
            1 => Self { mx: vec![40], mtheta: vec![50] },
            2 => Self { mx: vec![7, 7], mtheta: vec![7, 7] },
            _ => {
                let m = (2000f64.powf(1.0 / (2 * d) as f64).round() as usize).max(2);
                Self { mx: vec![m; d], mtheta: vec![m; d] }
            }
        }
    }

    pub fn d(&self) -> usize {
        self.mx.len()
    }

    pub fn node_count(&self) -> usize {
        self.mx.iter().chain(&self.mtheta).product()
    }

    /// Midpoint coordinates of node `idx` in lexicographic order, `x` levels
    /// outermost and the last `theta` level innermost.
    pub fn node(&self, mut idx: usize) -> (Vec<f64>, Vec<f64>) {
        let d = self.d();
        let mut x = vec![0.0; d];
        let mut t = vec![0.0; d];
        for l in (0..d).rev() {
            let m = self.mtheta[l];
            let i = idx % m;
            idx /= m;
            t[l] = -PI + (i as f64 + 0.5) * 2.0 * PI / m as f64;
        }
        for l in (0..d).rev() {
            let m = self.mx[l];
            let j = idx % m;
            idx /= m;
            x[l] = (j as f64 + 0.5) / m as f64;
        }
        (x, t)
    }
}

/// Symbol sampled on a [`SymbolGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridSymbol {
    pub r: usize,
    pub grid: SymbolGrid,
    /// One block per node, lexicographic order.
    pub values: Vec<Matrix>,
    /// Per-node flag set when an epsilon-limit did not stabilize.
    pub nonconverged: Vec<bool>,
}

impl GridSymbol {
    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn nonconverged_count(&self) -> usize {
        self.nonconverged.iter().filter(|&&b| b).count()
    }
}

/// Sample `s` at the midpoints of `grid`.
pub fn sample_symbol(s: &SymbolFn, grid: &SymbolGrid) -> Result<GridSymbol> {
    if grid.d() != s.d() {
        return Err(Error::Shape(format!("grid for d = {} and symbol with d = {}", grid.d(), s.d())));
    }
    let values = (0..grid.node_count())
        .into_par_iter()
        .map(|i| {
            let (x, t) = grid.node(i);
            let v = s.eval(&x, &t)?;
            if v.rows() != s.r() || v.cols() != s.r() {
                return Err(Error::Shape("symbol returned a block of the wrong order".into()));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let nonconverged = vec![false; values.len()];
    Ok(GridSymbol { r: s.r(), grid: grid.clone(), values, nonconverged })
}

/// Eigenvalues of every block, merged and sorted nondecreasing.
pub fn rearrange(g: &GridSymbol) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = if g.r == 1 {
        g.values.iter().map(|b| b[(0, 0)].re).collect()
    } else {
        g.values
            .par_iter()
            .map(|b| eigvals_hermitian(&HermitianMatrix::from_hermitian_part(b)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect()
    };
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn check_pair(k: &SymbolFn, x: &SymbolFn) -> Result<()> {
    if (k.d(), k.r()) != (x.d(), x.r()) {
        return Err(Error::Shape(format!(
            "symbols of shape (d={}, r={}) and (d={}, r={})",
            k.d(),
            k.r(),
            x.d(),
            x.r()
        )));
    }
    Ok(())
}

/// Pointwise geometric mean `G(kappa, xi)`. Evaluating at a point where
/// `kappa` is singular yields a domain error.
pub fn geometric_mean_symbol(kappa: &SymbolFn, xi: &SymbolFn) -> Result<SymbolFn> {
    check_pair(kappa, xi)?;
    let (k, x) = (kappa.clone(), xi.clone());
    Ok(SymbolFn::new(kappa.d(), kappa.r(), move |p, t| {
        let a = k.eval_hermitian(p, t)?;
        let b = x.eval_hermitian(p, t)?;
        if a.order() == 1 {
            let (u, v) = (a[(0, 0)].re, b[(0, 0)].re);
            if !(u > 0.0) {
                return Err(Error::Domain { function: "geometric mean symbol", lambda_min: u });
            }
            if !(v > 0.0) {
                return Err(Error::Domain { function: "geometric mean symbol", lambda_min: v });
            }
            return Ok(Matrix::from_real_diag(&[(u * v).sqrt()]));
        }
        Ok(alm_mean(&a, &b).map_err(|e| match e {
            Error::NotHpd { lambda_min } => Error::Domain { function: "geometric mean symbol", lambda_min },
            other => other,
        })?
        .into_matrix())
    }))
}

/// Candidate symbol: the pointwise limit of `G(kappa + eps I, xi + eps I)`.
#[derive(Clone, Debug)]
pub struct CandidateOptions {
    pub eps_sequence: Vec<f64>,
    pub stab_tol: f64,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        Self { eps_sequence: tol::CANDIDATE_EPS.to_vec(), stab_tol: tol::CANDIDATE_STAB_TOL }
    }
}

/// Sample the candidate symbol on `grid`. Nodes whose iterates do not settle
/// within `stab_tol` keep the last iterate and are flagged.
pub fn candidate_symbol(
    kappa: &SymbolFn,
    xi: &SymbolFn,
    grid: &SymbolGrid,
    opts: &CandidateOptions,
) -> Result<GridSymbol> {
    check_pair(kappa, xi)?;
    if grid.d() != kappa.d() {
        return Err(Error::Shape("grid and symbols have different dimensions".into()));
    }
    if opts.eps_sequence.is_empty()
        || opts.eps_sequence.iter().any(|&e| !(e > 0.0))
        || opts.eps_sequence.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter("eps sequence must be positive and decreasing".into()));
    }
    let nodes = (0..grid.node_count())
        .into_par_iter()
        .map(|i| {
            let (x, t) = grid.node(i);
            let a = kappa.eval_hermitian(&x, &t)?;
            let b = xi.eval_hermitian(&x, &t)?;
            candidate_at(&a, &b, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let (values, nonconverged) = nodes.into_iter().unzip();
    Ok(GridSymbol { r: kappa.r(), grid: grid.clone(), values, nonconverged })
}

/// Epsilon-limit at one point. Returns the value and a non-convergence flag.
pub fn candidate_at(a: &HermitianMatrix, b: &HermitianMatrix, opts: &CandidateOptions) -> Result<(Matrix, bool)> {
    let mut prev: Option<Matrix> = None;
    for &eps in &opts.eps_sequence {
        let g = alm_mean(&a.shift(eps), &b.shift(eps))?.into_matrix();
        if let Some(p) = &prev {
            if g.max_abs_diff(p) < opts.stab_tol {
                return Ok((g, false));
            }
        }
        prev = Some(g);
    }
    Ok((prev.expect("nonempty sequence"), true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian() -> TrigPolynomial {
        TrigPolynomial::scalar(&[(0, 2.0), (1, -1.0), (-1, -1.0)])
    }

    #[test]
    fn eval_trig_examples() {
        assert!(eval_trig(&laplacian(), &[0.0])[(0, 0)].norm() < 1e-15);
        assert!((eval_trig(&laplacian(), &[PI])[(0, 0)].re - 4.0).abs() < 1e-15);
        let mut p = TrigPolynomial::new(1, 2);
        p.add_coeff(vec![0], Matrix::identity(2)).unwrap();
        assert_eq!(eval_trig(&p, &[1.234]), Matrix::identity(2));
    }

    #[test]
    fn hermitian_flag() {
        assert!(laplacian().is_hermitian());
        let p = TrigPolynomial::scalar(&[(1, 1.0)]);
        assert!(!p.is_hermitian());
    }

    #[test]
    fn sampling_uses_midpoints() {
        let s = SymbolFn::scalar(1, |x, _| x[0]);
        let g = sample_symbol(&s, &SymbolGrid::new(vec![2], vec![1]).unwrap()).unwrap();
        let v: Vec<f64> = g.values.iter().map(|b| b[(0, 0)].re).collect();
        assert_eq!(v, vec![0.25, 0.75]);

        let s = SymbolFn::scalar(1, |_, t| 2.0 - 2.0 * t[0].cos());
        let g = sample_symbol(&s, &SymbolGrid::new(vec![1], vec![2]).unwrap()).unwrap();
        for b in &g.values {
            assert!((b[(0, 0)].re - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_symbol_samples_constant() {
        let c = Matrix::from_real_diag(&[1.0, 3.0]);
        let g = sample_symbol(&SymbolFn::constant(1, c.clone()), &SymbolGrid::default_for(1)).unwrap();
        assert!(g.values.iter().all(|b| *b == c));
    }

    #[test]
    fn rearrange_examples() {
        let grid = SymbolGrid::new(vec![2], vec![1]).unwrap();
        let g = GridSymbol {
            r: 2,
            grid: grid.clone(),
            values: vec![Matrix::from_real_diag(&[1.0, 3.0]); 2],
            nonconverged: vec![false; 2],
        };
        assert_eq!(rearrange(&g).unwrap(), vec![1.0, 1.0, 3.0, 3.0]);
        let g = GridSymbol {
            r: 1,
            grid: SymbolGrid::new(vec![3], vec![1]).unwrap(),
            values: [2.0, 0.0, 1.0].iter().map(|&v| Matrix::from_real_diag(&[v])).collect(),
            nonconverged: vec![false; 3],
        };
        assert_eq!(rearrange(&g).unwrap(), vec![0.0, 1.0, 2.0]);
        let g = GridSymbol {
            r: 2,
            grid,
            values: vec![Matrix::from_real_diag(&[0.0, 5.0]), Matrix::from_real_diag(&[2.0, 2.0])],
            nonconverged: vec![false; 2],
        };
        assert_eq!(rearrange(&g).unwrap(), vec![0.0, 2.0, 2.0, 5.0]);
    }

    #[test]
    fn geometric_mean_symbol_examples() {
        let four = SymbolFn::constant(1, Matrix::from_real_diag(&[4.0]));
        let nine = SymbolFn::constant(1, Matrix::from_real_diag(&[9.0]));
        let g = geometric_mean_symbol(&four, &nine).unwrap();
        assert!((g.eval(&[0.5], &[0.0]).unwrap()[(0, 0)].re - 6.0).abs() < 1e-14);

        let k = SymbolFn::constant(1, Matrix::from_real_diag(&[1.0, 4.0]));
        let x = SymbolFn::constant(1, Matrix::from_real_diag(&[9.0, 16.0]));
        let g = geometric_mean_symbol(&k, &x).unwrap().eval(&[0.1], &[0.2]).unwrap();
        assert!(g.max_abs_diff(&Matrix::from_real_diag(&[3.0, 8.0])) < 1e-13);

        let kk = geometric_mean_symbol(&k, &k).unwrap().eval(&[0.3], &[0.0]).unwrap();
        assert!(kk.max_abs_diff(&Matrix::from_real_diag(&[1.0, 4.0])) < 1e-13);
    }

    #[test]
    fn geometric_mean_symbol_rejects_singular_point() {
        let z = SymbolFn::scalar(1, |x, _| x[0] - 0.5);
        let one = SymbolFn::constant(1, Matrix::identity(1));
        let g = geometric_mean_symbol(&z, &one).unwrap();
        assert!(matches!(g.eval(&[0.25], &[0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn candidate_of_zero_is_zero() {
        let z = SymbolFn::constant(1, Matrix::zeros(2, 2));
        let g = candidate_symbol(&z, &z, &SymbolGrid::new(vec![2], vec![2]).unwrap(), &Default::default())
            .unwrap();
        assert_eq!(g.nonconverged_count(), 0);
        for v in &g.values {
            assert!(v.max_abs() < 1e-6);
        }
    }

    #[test]
    fn candidate_of_disjoint_ranges_is_zero() {
        // Brute-force epsilon-limit: G(diag(1+e, e), diag(e, 1+e)) = sqrt(e(1+e)) I.
        let a = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        let b = HermitianMatrix::from_real_diag(&[0.0, 1.0]);
        let opts = CandidateOptions::default();
        let (v, flagged) = candidate_at(&a, &b, &opts).unwrap();
        let e: f64 = 1e-8;
        let expect = (e * (1.0 + e)).sqrt();
        assert!(v.max_abs_diff(&Matrix::from_real_diag(&[expect, expect])) < 1e-12);
        // sqrt(eps) decays too slowly to meet the stabilization tolerance.
        assert!(flagged);
    }
}
