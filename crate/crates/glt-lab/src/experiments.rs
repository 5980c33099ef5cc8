//! Registered numerical experiments. Each one builds a family of matrices per
//! size, takes their geometric (two inputs) or Karcher (three inputs) mean,
//! and compares the spectrum with the expected symbol.

use std::f64::consts::PI;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretizations::{
    bilaplacian_poly, bspline_symbol, bspline_toeplitz, curie_weiss_extremes, curie_weiss_full,
    curie_weiss_restricted, curie_weiss_symbol, fd4_matrix, fd4_matrix_2d, BsplineKind, BsplineWhich, CWParams,
    CwConvention,
};
use crate::error::{Error, Result};
use crate::geomean::{alm_mean, karcher_mean, KarcherConfig};
use crate::io::{self, format_f64};
use crate::linalg::{eigvals_hermitian, C64, HermitianMatrix, Matrix};
use crate::spectral::{compare_eigenvalues, decay_table_from_values, DecayTable, Extremum, LogBase, SpectralReport};
use crate::structured::{diagonal_sampling, toeplitz, MultiIndex, SamplingFn};
use crate::symbols::{
    candidate_symbol, rearrange, sample_symbol, CandidateOptions, GridSymbol, SymbolFn, SymbolGrid, TrigPolynomial,
};
use crate::tol;

/// Every registered experiment id.
pub const EXPERIMENT_IDS: &[&str] = &[
    "gm2_ex1",
    "gm2_ex2",
    "ch4_ex1_1d",
    "ch4_ex2_2d",
    "ch4_ex3_1d",
    "ch4_ex4_2d",
    "case1_ex1",
    "case1_ex2",
    "case2_ex1",
    "case2_ex2",
    "bspline_quadratic",
    "bspline_cubic",
    "cw",
];

/// Experiment parameters. Keys are flat so a JSON file mirrors the CLI flags;
/// empty lists and absent options select the per-experiment defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// Matrix sizes; per level for two-level experiments, `N + 1` for `cw`.
    pub sizes: Vec<usize>,
    pub gamma: f64,
    pub b: f64,
    pub threshold: f64,
    /// Base of the decay exponents.
    pub log: Option<LogBase>,
    pub eps_sequence: Vec<f64>,
    pub karcher_tol: f64,
    pub karcher_max_iter: usize,
    /// Spin counts for the full Curie-Weiss sweep (`cw` only).
    pub full_cw_spins: Vec<usize>,
    pub grid_x: Vec<usize>,
    pub grid_theta: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            id: String::new(),
            sizes: Vec::new(),
            gamma: 1.0,
            b: 1.0,
            threshold: tol::SPECTRAL_THRESHOLD,
            log: None,
            eps_sequence: Vec::new(),
            karcher_tol: tol::KARCHER_RESIDUAL,
            karcher_max_iter: tol::KARCHER_MAX_ITER,
            full_cw_spins: Vec::new(),
            grid_x: Vec::new(),
            grid_theta: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(id: &str) -> Self {
        Self { id: id.to_string(), ..Self::default() }
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sizes = sizes;
        self
    }

    fn validate(&self) -> Result<()> {
        if !EXPERIMENT_IDS.contains(&self.id.as_str()) {
            return Err(Error::UnknownExperiment(self.id.clone()));
        }
        if self.sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!("sizes must be strictly increasing, got {:?}", self.sizes)));
        }
        if self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParameter("every size must be at least 2".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::InvalidParameter("threshold must be nonnegative".into()));
        }
        Ok(())
    }

    fn karcher(&self) -> KarcherConfig {
        KarcherConfig { residual_tol: self.karcher_tol, max_iterations: self.karcher_max_iter, ..Default::default() }
    }

    fn candidate(&self) -> CandidateOptions {
        let mut o = CandidateOptions::default();
        if !self.eps_sequence.is_empty() {
            o.eps_sequence = self.eps_sequence.clone();
        }
        o
    }

    fn grid(&self, d: usize) -> Result<SymbolGrid> {
        let def = SymbolGrid::default_for(d);
        let mx = if self.grid_x.is_empty() { def.mx } else { self.grid_x.clone() };
        let mt = if self.grid_theta.is_empty() { def.mtheta } else { self.grid_theta.clone() };
        SymbolGrid::new(mx, mt)
    }
}

/// Default sizes of an experiment.
pub fn default_sizes(id: &str) -> Vec<usize> {
    match id {
        "ch4_ex2_2d" => vec![10, 20, 40],
        "ch4_ex4_2d" => vec![10, 20],
        "bspline_quadratic" | "bspline_cubic" => vec![20, 40, 80],
        _ => vec![40, 80, 160, 320],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KarcherRun {
    pub n: usize,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Symbol range against the extremal eigenvalues and the condition number.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeRow {
    pub n: usize,
    pub symbol_min: f64,
    pub symbol_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: f64,
}

/// Share of eigenvalues in the zero cluster against its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroRow {
    pub n: usize,
    pub fraction: f64,
    pub target: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FullCwRow {
    pub spins: usize,
    /// Fraction of eigenvalues with `|lambda| <= 0.25`.
    pub frac_small: f64,
    /// `||H / N||_F / 2^{N/2}`.
    pub frobenius_stat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub id: String,
    /// `symbol`, `conjectured symbol` or `candidate symbol`.
    pub symbol_label: String,
    pub reports: Vec<SpectralReport>,
    pub decay: Vec<(String, DecayTable)>,
    pub ranges: Vec<RangeRow>,
    pub zero: Vec<ZeroRow>,
    pub karcher: Vec<KarcherRun>,
    pub full_cw: Vec<FullCwRow>,
    /// Candidate-symbol nodes whose epsilon limit did not settle.
    pub nonconverged_nodes: usize,
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    fn new(id: &str, label: &str) -> Self {
        Self {
            id: id.into(),
            symbol_label: label.into(),
            reports: Vec::new(),
            decay: Vec::new(),
            ranges: Vec::new(),
            zero: Vec::new(),
            karcher: Vec::new(),
            full_cw: Vec::new(),
            nonconverged_nodes: 0,
            notes: Vec::new(),
        }
    }

    pub fn decay_table(&self, name: &str) -> Option<&DecayTable> {
        self.decay.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Run any registered experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.id == "cw" {
        run_cw_experiment(cfg)
    } else {
        run_gm_example(&cfg.id, cfg)
    }
}

// Builders shared by the experiments.

fn toeplitz_1d(n: usize, coeffs: &[(i64, f64)]) -> Result<Matrix> {
    toeplitz(&MultiIndex::uni(n), &TrigPolynomial::scalar(coeffs))
}

fn diag_1d(n: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Matrix> {
    diagonal_sampling(&MultiIndex::uni(n), &SamplingFn::scalar(1, move |x| f(x[0])))
}

fn diag_2d(n: usize, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Matrix> {
    diagonal_sampling(&MultiIndex::new(vec![n, n])?, &SamplingFn::scalar(2, move |x| f(x[0], x[1])))
}

/// `T_{(n,n)}(f(theta_1) + f(theta_2))` for a univariate polynomial `f`.
fn toeplitz_2d_sum(n: usize, f: &TrigPolynomial) -> Result<Matrix> {
    let p = f.embed(2, 0).add(&f.embed(2, 1))?;
    toeplitz(&MultiIndex::new(vec![n, n])?, &p)
}

fn hpd(m: Matrix) -> Result<HermitianMatrix> {
    HermitianMatrix::new(m)
}

fn step(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        0.0
    }
}

fn real2(a: [[f64; 2]; 2]) -> Matrix {
    Matrix::from_real_rows(&[&a[0], &a[1]])
}

fn real3(a: [[f64; 3]; 3]) -> Matrix {
    Matrix::from_real_rows(&[&a[0], &a[1], &a[2]])
}

/// Fourier coefficients of `theta` on `(0, pi]`, zero on `[-pi, 0]`.
fn ramp_coeff(k: i64) -> C64 {
    if k == 0 {
        return C64::new(PI / 4.0, 0.0);
    }
    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
    let kf = k as f64;
    C64::new((s - 1.0) / (kf * kf), PI * s / kf) / (2.0 * PI)
}

/// Fourier coefficients of the indicator of `[-a, a]`.
fn indicator_coeff(a: f64, k: i64) -> f64 {
    if k == 0 {
        a / PI
    } else {
        (k as f64 * a).sin() / (PI * k as f64)
    }
}

fn block_toeplitz_full(n: usize, coeff: impl Fn(i64) -> C64, block: &Matrix) -> Result<Matrix> {
    let m = n as i64;
    let pairs: Vec<(i64, C64)> = (1 - m..m).map(|k| (k, coeff(k))).collect();
    toeplitz(&MultiIndex::uni(n), &TrigPolynomial::scalar_complex(&pairs).tensor_block(block)?)
}

/// `(D^{1/2}(w) (x) I_r) M (D^{1/2}(w) (x) I_r)`.
fn sandwich(m: &Matrix, w: &[f64], r: usize) -> Matrix {
    let d: Vec<C64> = w.iter().flat_map(|&v| std::iter::repeat_n(C64::new(v.sqrt(), 0.0), r)).collect();
    m.scale_rows(&d).scale_cols(&d)
}

fn case2_ex2_a(x: f64) -> f64 {
    if x <= 0.5 {
        1.0 - 2.0 * x
    } else {
        0.0
    }
}

fn case2_ex2_b(x: f64) -> f64 {
    if x <= 1.0 / 3.0 || x >= 2.0 / 3.0 {
        0.0
    } else if x <= 0.5 {
        x - 1.0 / 3.0
    } else {
        2.0 / 3.0 - x
    }
}

/// Input matrices of experiment `id` at size `n`.
pub fn experiment_inputs(id: &str, n: usize) -> Result<Vec<HermitianMatrix>> {
    let nf = n as f64;
    let laplace_like = [(0, 3.0), (1, 1.0), (-1, 1.0)];
    Ok(match id {
        "gm2_ex1" => {
            let a = diag_1d(n, step)?.shift(nf.powi(-4));
            vec![hpd(a)?, hpd(toeplitz_1d(n, &laplace_like)?)?]
        }
        "gm2_ex2" => {
            let a = diag_1d(n, step)?.shift(nf.powi(-4));
            let c = diag_1d(n, |x| 1.0 - step(x))?.shift(nf.powi(-4));
            let b = c.matmul(&toeplitz_1d(n, &laplace_like)?)?.matmul(&c)?;
            vec![hpd(a)?, HermitianMatrix::from_hermitian_part(&b)]
        }
        "ch4_ex1_1d" => {
            let a = toeplitz(&MultiIndex::uni(n), &bilaplacian_poly())?;
            vec![hpd(a)?, HermitianMatrix::from_hermitian_part(&fd4_matrix(n, |x| x))]
        }
        "ch4_ex2_2d" => {
            let a = toeplitz_2d_sum(n, &bilaplacian_poly())?;
            vec![hpd(a)?, HermitianMatrix::from_hermitian_part(&fd4_matrix_2d(n, n, |x| x))]
        }
        "ch4_ex3_1d" => {
            let d = diag_1d(n, |x| x * x)?;
            let t3 = toeplitz_1d(n, &[(0, 4.0), (1, -1.0), (-1, -1.0)])?;
            let a3 = d.matmul(&t3)?.matmul(&d)?;
            vec![hpd(toeplitz_1d(n, &laplace_like)?)?, hpd(d)?, HermitianMatrix::from_hermitian_part(&a3)]
        }
        "ch4_ex4_2d" => {
            let a1 = toeplitz_2d_sum(n, &TrigPolynomial::scalar(&laplace_like))?;
            let a2 = diag_2d(n, |x, y| x * x + y * y)?;
            let d = diag_2d(n, |x, y| 1.0 / x + 1.0 / y)?;
            let t = toeplitz_2d_sum(n, &TrigPolynomial::scalar(&[(0, 4.0), (1, -1.0), (-1, -1.0)]))?;
            let a3 = d.matmul(&t)?.matmul(&d)?;
            vec![hpd(a1)?, hpd(a2)?, HermitianMatrix::from_hermitian_part(&a3)]
        }
        "case1_ex1" => {
            let a2 = real2([[2.0, 1.0], [1.0, 2.0]]);
            let b2 = real2([[3.0, 1.0], [1.0, 1.0]]);
            let a = block_toeplitz_full(n, ramp_coeff, &a2)?.shift(nf.powi(-3));
            let b = block_toeplitz_full(n, |k| ramp_coeff(-k), &b2)?.shift(nf.powi(-3));
            vec![HermitianMatrix::from_hermitian_part(&a), HermitianMatrix::from_hermitian_part(&b)]
        }
        "case1_ex2" => {
            let a2 = real2([[2.0, 1.0], [1.0, 2.0]]);
            let b2 = real2([[3.0, 1.0], [1.0, 1.0]]);
            let a = block_toeplitz_full(n, |k| C64::new(indicator_coeff(0.5, k), 0.0), &a2)?.shift(nf.powi(-3));
            let b = block_toeplitz_full(n, |k| C64::new(indicator_coeff(0.25, k), 0.0), &b2)?.shift(nf.powi(-3));
            vec![HermitianMatrix::from_hermitian_part(&a), HermitianMatrix::from_hermitian_part(&b)]
        }
        "case2_ex1" => {
            let f = TrigPolynomial::scalar(&[(0, 2.0), (1, -0.5), (-1, -0.5)]);
            let g = TrigPolynomial::scalar(&[(0, 3.0), (1, 0.5), (-1, 0.5)]);
            let idx = MultiIndex::uni(n);
            let a = toeplitz(&idx, &f.tensor_block(&real2([[1.0, 1.0], [1.0, 1.0]]))?)?.shift(nf.powi(-2));
            let pert = diagonal_sampling(&idx, &SamplingFn::new(1, 2, |x| Matrix::identity(2).scale(1.0 + x[0])))?;
            let b = &toeplitz(&idx, &g.tensor_block(&real2([[1.0, 2.0], [2.0, 4.0]]))?)? + &pert.scale(nf.powi(-2));
            vec![hpd(a)?, hpd(b)?]
        }
        "case2_ex2" => {
            let f = TrigPolynomial::scalar(&[(0, 2.0), (1, 0.5), (-1, 0.5)]);
            let g = TrigPolynomial::scalar(&[(0, 3.0), (1, 0.5), (-1, 0.5)]);
            let idx = MultiIndex::uni(n);
            let a3 = real3([[2.0, 0.0, 1.0], [0.0, 2.0, 1.0], [1.0, 1.0, 1.0]]);
            let b3 = real3([[2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 2.0]]);
            let xs: Vec<f64> = (1..=n).map(|i| i as f64 / nf).collect();
            let wa: Vec<f64> = xs.iter().map(|&x| case2_ex2_a(x)).collect();
            let wb: Vec<f64> = xs.iter().map(|&x| case2_ex2_b(x)).collect();
            let a = sandwich(&toeplitz(&idx, &f.tensor_block(&a3)?)?, &wa, 3).shift(1.0 / (5.0 * nf));
            let b = sandwich(&toeplitz(&idx, &g.tensor_block(&b3)?)?, &wb, 3).shift(1.0 / (5.0 * nf));
            vec![HermitianMatrix::from_hermitian_part(&a), HermitianMatrix::from_hermitian_part(&b)]
        }
        "bspline_quadratic" | "bspline_cubic" => {
            let kind = if id == "bspline_quadratic" { BsplineKind::QuadraticC0 } else { BsplineKind::CubicC1 };
            [BsplineWhich::Stiffness, BsplineWhich::Mass, BsplineWhich::Sum]
                .into_iter()
                .map(|w| hpd(bspline_toeplitz(kind, w, n)?))
                .collect::<Result<Vec<_>>>()?
        }
        other => return Err(Error::UnknownExperiment(other.to_string())),
    })
}

fn spatial_dim(id: &str) -> usize {
    if id.ends_with("_2d") {
        2
    } else {
        1
    }
}

/// Limit of the zero-cluster share for the case studies.
fn zero_target(id: &str) -> Option<f64> {
    match id {
        "case1_ex1" | "case2_ex1" => Some(1.0),
        "case1_ex2" => Some(1.0 - 1.0 / (4.0 * PI)),
        "case2_ex2" => Some(17.0 / 18.0),
        _ => None,
    }
}

fn karcher_symbol(blocks: Vec<SymbolFn>, cfg: KarcherConfig) -> SymbolFn {
    let (d, r) = (blocks[0].d(), blocks[0].r());
    SymbolFn::new(d, r, move |x, t| {
        let list = blocks.iter().map(|s| s.eval_hermitian(x, t)).collect::<Result<Vec<_>>>()?;
        Ok(karcher_mean(&list, &cfg)?.mean.into_matrix())
    })
}

/// Expected symbol of an experiment sampled on the configured grid, and its label.
pub fn experiment_symbol(id: &str, cfg: &ExperimentConfig) -> Result<(GridSymbol, &'static str)> {
    let grid = cfg.grid(spatial_dim(id))?;
    let bil = |t: f64| (2.0 - 2.0 * t.cos()).powi(2);
    let scalar = |s: SymbolFn| sample_symbol(&s, &grid);
    let g = match id {
        "gm2_ex1" => scalar(SymbolFn::scalar(1, |x, t| (step(x[0]) * (3.0 + 2.0 * t[0].cos())).sqrt()))?,
        "gm2_ex2" => scalar(SymbolFn::scalar(1, |_, _| 0.0))?,
        "ch4_ex1_1d" => scalar(SymbolFn::scalar(1, move |x, t| x[0].sqrt() * bil(t[0])))?,
        "ch4_ex2_2d" => scalar(SymbolFn::scalar(2, move |x, t| {
            let (f1, f2) = (bil(t[0]), bil(t[1]));
            ((f1 + f2) * (x[0] * f1 + x[1] * f2)).sqrt()
        }))?,
        "ch4_ex3_1d" => scalar(SymbolFn::scalar(1, |x, t| {
            let (x, c) = (x[0], t[0].cos());
            ((3.0 + 2.0 * c) * x * x * x.powi(4) * (4.0 - 2.0 * c)).cbrt()
        }))?,
        "ch4_ex4_2d" => scalar(SymbolFn::scalar(2, |x, t| {
            let (c1, c2) = (t[0].cos(), t[1].cos());
            let b = 1.0 / x[0] + 1.0 / x[1];
            ((6.0 + 2.0 * c1 + 2.0 * c2) * (x[0] * x[0] + x[1] * x[1]) * b * b * (8.0 - 2.0 * c1 - 2.0 * c2)).cbrt()
        }))?,
        "bspline_quadratic" | "bspline_cubic" => {
            let kind = if id == "bspline_quadratic" { BsplineKind::QuadraticC0 } else { BsplineKind::CubicC1 };
            let parts = [BsplineWhich::Stiffness, BsplineWhich::Mass, BsplineWhich::Sum]
                .into_iter()
                .map(|w| SymbolFn::from_trig(bspline_symbol(kind, w)))
                .collect();
            scalar(karcher_symbol(parts, cfg.karcher()))?
        }
        "cw" => scalar(curie_weiss_symbol(cfg.gamma, cfg.b))?,
        "case1_ex1" | "case1_ex2" | "case2_ex1" | "case2_ex2" => {
            let (kappa, xi) = case_symbols(id);
            return Ok((candidate_symbol(&kappa, &xi, &grid, &cfg.candidate())?, "candidate symbol"));
        }
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    let label = match id {
        "ch4_ex3_1d" | "ch4_ex4_2d" | "bspline_quadratic" | "bspline_cubic" => "conjectured symbol",
        _ => "symbol",
    };
    Ok((g, label))
}

fn case_symbols(id: &str) -> (SymbolFn, SymbolFn) {
    let tensor = |f: fn(f64, f64) -> f64, blk: Matrix| {
        SymbolFn::new(1, blk.rows(), move |x, t| Ok(blk.scale(f(x[0], t[0]))))
    };
    let a2 = real2([[2.0, 1.0], [1.0, 2.0]]);
    let b2 = real2([[3.0, 1.0], [1.0, 1.0]]);
    match id {
        "case1_ex1" => (
            tensor(|_, t| if t > 0.0 { t } else { 0.0 }, a2),
            tensor(|_, t| if t < 0.0 { -t } else { 0.0 }, b2),
        ),
        "case1_ex2" => (
            tensor(|_, t| if t.abs() <= 0.5 { 1.0 } else { 0.0 }, a2),
            tensor(|_, t| if t.abs() <= 0.25 { 1.0 } else { 0.0 }, b2),
        ),
        "case2_ex1" => (
            tensor(|_, t| 2.0 - t.cos(), real2([[1.0, 1.0], [1.0, 1.0]])),
            tensor(|_, t| 3.0 + t.cos(), real2([[1.0, 2.0], [2.0, 4.0]])),
        ),
        _ => (
            tensor(|x, t| case2_ex2_a(x) * (2.0 + t.cos()), real3([[2.0, 0.0, 1.0], [0.0, 2.0, 1.0], [1.0, 1.0, 1.0]])),
            tensor(|x, t| case2_ex2_b(x) * (3.0 + t.cos()), real3([[2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 2.0]])),
        ),
    }
}

/// Mean of the inputs at one size: ALM for two, Karcher for more.
fn mean_of(inputs: &[HermitianMatrix], n: usize, kcfg: &KarcherConfig) -> Result<(HermitianMatrix, Option<KarcherRun>)> {
    if inputs.len() == 2 {
        return Ok((alm_mean(&inputs[0], &inputs[1])?, None));
    }
    let r = karcher_mean(inputs, kcfg)?;
    let run = KarcherRun {
        n,
        iterations: r.iterations,
        residual: r.residual_history.last().copied().unwrap_or(f64::NAN),
        converged: r.converged,
    };
    Ok((r.mean, Some(run)))
}

/// Means of one of the geometric-mean experiments, compared with its symbol.
pub fn run_gm_example(id: &str, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if id == "cw" || !EXPERIMENT_IDS.contains(&id) {
        return Err(Error::UnknownExperiment(id.to_string()));
    }
    let sizes = if cfg.sizes.is_empty() { default_sizes(id) } else { cfg.sizes.clone() };
    let (symbol, label) = experiment_symbol(id, cfg)?;
    let sorted = rearrange(&symbol)?;
    let (smin, smax) = (sorted[0], sorted[sorted.len() - 1]);
    let mut out = ExperimentOutput::new(id, label);
    out.nonconverged_nodes = symbol.nonconverged_count();
    if out.nonconverged_nodes > 0 {
        out.notes.push(format!(
            "{} of {} candidate symbol nodes did not settle; their last iterate is used",
            out.nonconverged_nodes,
            symbol.values.len()
        ));
    }
    let kcfg = cfg.karcher();
    for &n in &sizes {
        info!("{id}: n = {n}");
        let inputs = experiment_inputs(id, n)?;
        let (mean, run) = mean_of(&inputs, n, &kcfg)?;
        if let Some(run) = run {
            if !run.converged {
                out.notes.push(format!("n = {n}: Karcher iteration stopped at residual {:e}", run.residual));
            }
            out.karcher.push(run);
        }
        let report = compare_eigenvalues(n, eigvals_hermitian(&mean)?, &sorted, cfg.threshold);
        out.ranges.push(RangeRow {
            n,
            symbol_min: smin,
            symbol_max: smax,
            lambda_min: report.lambda_min,
            lambda_max: report.lambda_max,
            cond: report.condition_number().unwrap_or(f64::INFINITY),
        });
        if let Some(target) = zero_target(id) {
            let f = report.below_threshold_fraction;
            out.zero.push(ZeroRow { n, fraction: f, target, error: (target - f).abs() });
        }
        if id == "gm2_ex2" {
            let (count, excess) = report.outliers_above(1e-6);
            out.notes.push(format!("n = {n}: {count} eigenvalues above the symbol range, largest excess {excess:e}"));
        }
        out.reports.push(report);
    }
    if sizes.len() >= 2 && !id.starts_with("bspline") {
        let values: Vec<f64> = out.reports.iter().map(|r| r.lambda_min).collect();
        let base = cfg.log.unwrap_or(LogBase::Base2);
        out.decay.push(("min".into(), decay_table_from_values(&sizes, &values, 0.0, Extremum::Min, base)?));
    }
    Ok(out)
}

/// Restricted Curie-Weiss spectra against the symbol, extremal decay tables
/// and an optional sweep over the full model.
pub fn run_cw_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sizes = if cfg.sizes.is_empty() { default_sizes("cw") } else { cfg.sizes.clone() };
    let (gamma, b) = (cfg.gamma, cfg.b);
    CWParams::new(gamma, b, 1)?;
    let grid = cfg.grid(1)?;
    let sorted = rearrange(&sample_symbol(&curie_weiss_symbol(gamma, b), &grid)?)?;
    let (m, mm) = curie_weiss_extremes(gamma, b);
    let mut out = ExperimentOutput::new("cw", "symbol");
    let reports = sizes
        .par_iter()
        .map(|&n1| {
            let h = curie_weiss_restricted(&CWParams::new(gamma, b, n1 - 1)?, CwConvention::Midpoint);
            let l = eigvals_hermitian(&hpd(h)?)?;
            Ok(compare_eigenvalues(n1, l, &sorted, cfg.threshold))
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        out.ranges.push(RangeRow {
            n: r.n,
            symbol_min: m,
            symbol_max: mm,
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            cond: f64::NAN,
        });
    }
    if sizes.len() >= 2 {
        let base = cfg.log.unwrap_or(LogBase::Base10);
        let mins: Vec<f64> = reports.iter().map(|r| r.lambda_min).collect();
        let maxs: Vec<f64> = reports.iter().map(|r| r.lambda_max).collect();
        out.decay.push(("min".into(), decay_table_from_values(&sizes, &mins, m, Extremum::Min, base)?));
        out.decay.push(("max".into(), decay_table_from_values(&sizes, &maxs, mm, Extremum::Max, base)?));
    }
    out.reports = reports;
    out.full_cw = full_cw_sweep(gamma, b, &cfg.full_cw_spins)?;
    Ok(out)
}

/// Small-eigenvalue share and normalized Frobenius norm of `H / N`.
pub fn full_cw_sweep(gamma: f64, b: f64, spins: &[usize]) -> Result<Vec<FullCwRow>> {
    spins
        .iter()
        .map(|&n| {
            let h = curie_weiss_full(&CWParams::new(gamma, b, n)?)?;
            let frob = h.frobenius() / 2f64.powf(n as f64 / 2.0);
            let l = eigvals_hermitian(&hpd(h)?)?;
            let frac = l.iter().filter(|x| x.abs() <= 0.25).count() as f64 / l.len() as f64;
            Ok(FullCwRow { spins: n, frac_small: frac, frobenius_stat: frob })
        })
        .collect()
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Write every table of `out` into `dir`. File contents depend only on the
/// results, so reruns with the same configuration are byte-identical.
pub fn write_experiment_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_reports_csv(&dir.join("reports.csv"), &out.reports)?;
    for r in &out.reports {
        io::write_overlay_csv(&dir.join(format!("overlay_{}.csv", r.n)), r)?;
    }
    for (name, t) in &out.decay {
        io::write_decay_csv(&dir.join(format!("decay_{name}.csv")), t)?;
    }
    if !out.ranges.is_empty() {
        let rows = out.ranges.iter().map(|r| {
            vec![
                r.n.to_string(),
                format_f64(r.symbol_min),
                format_f64(r.symbol_max),
                format_f64(r.lambda_min),
                format_f64(r.lambda_max),
                format_f64(r.cond),
            ]
        });
        let bytes = table(&["n", "symbol_min", "symbol_max", "lambda_min", "lambda_max", "cond"], rows)?;
        io::write_atomic(&dir.join("range.csv"), &bytes)?;
    }
    if !out.zero.is_empty() {
        let rows = out
            .zero
            .iter()
            .map(|z| vec![z.n.to_string(), format_f64(z.fraction), format_f64(z.target), format_f64(z.error)]);
        io::write_atomic(&dir.join("zero_fraction.csv"), &table(&["n", "fraction", "target", "error"], rows)?)?;
    }
    if !out.karcher.is_empty() {
        let rows = out.karcher.iter().map(|k| {
            vec![k.n.to_string(), k.iterations.to_string(), format_f64(k.residual), k.converged.to_string()]
        });
        io::write_atomic(&dir.join("karcher.csv"), &table(&["n", "iterations", "residual", "converged"], rows)?)?;
    }
    if !out.full_cw.is_empty() {
        let rows = out
            .full_cw
            .iter()
            .map(|f| vec![f.spins.to_string(), format_f64(f.frac_small), format_f64(f.frobenius_stat)]);
        io::write_atomic(&dir.join("cw_full.csv"), &table(&["spins", "frac_small", "frobenius_stat"], rows)?)?;
    }
    io::write_atomic(&dir.join("summary.txt"), summary_text(out).as_bytes())?;
    Ok(())
}

/// Plain-text digest of an experiment, as written to `summary.txt`.
pub fn summary_text(out: &ExperimentOutput) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", out.id);
    let _ = writeln!(s, "reference: {}", out.symbol_label);
    let _ = writeln!(s, "\n{:>6} {:>13} {:>13} {:>11} {:>11} {:>10}", "n", "lambda_min", "lambda_max", "sup_dist", "l1_dist", "frac_below");
    for r in &out.reports {
        let _ = writeln!(
            s,
            "{:>6} {:>13.6e} {:>13.6e} {:>11.3e} {:>11.3e} {:>10.4}",
            r.n, r.lambda_min, r.lambda_max, r.sup_distance, r.l1_distance, r.below_threshold_fraction
        );
    }
    for (name, t) in &out.decay {
        let _ = writeln!(s, "\ndecay {name} (reference {}, {:?})", format_f64(t.reference), t.base);
        let _ = writeln!(s, "{:>6} {:>13} {:>13} {:>8}", "n", "value", "tau", "alpha");
        for r in &t.rows {
            let alpha = r.alpha.map(|a| format!("{a:.4}")).unwrap_or_default();
            let _ = writeln!(s, "{:>6} {:>13.6e} {:>13.4e} {:>8}", r.n, r.value, r.tau, alpha);
        }
    }
    if !out.ranges.is_empty() {
        let _ = writeln!(s, "\n{:>6} {:>10} {:>10} {:>13} {:>10} {:>11}", "n", "symb_min", "symb_max", "lambda_min", "lambda_max", "cond");
        for r in &out.ranges {
            let _ = writeln!(
                s,
                "{:>6} {:>10.4} {:>10.4} {:>13.4e} {:>10.4} {:>11.4e}",
                r.n, r.symbol_min, r.symbol_max, r.lambda_min, r.lambda_max, r.cond
            );
        }
    }
    if !out.zero.is_empty() {
        let _ = writeln!(s, "\n{:>6} {:>9} {:>9} {:>9}", "n", "fraction", "target", "error");
        for z in &out.zero {
            let _ = writeln!(s, "{:>6} {:>9.4} {:>9.4} {:>9.4}", z.n, z.fraction, z.target, z.error);
        }
    }
    if !out.karcher.is_empty() {
        let _ = writeln!(s, "\n{:>6} {:>10} {:>11} {:>9}", "n", "karcher_it", "residual", "converged");
        for k in &out.karcher {
            let _ = writeln!(s, "{:>6} {:>10} {:>11.3e} {:>9}", k.n, k.iterations, k.residual, k.converged);
        }
    }
    if !out.full_cw.is_empty() {
        let _ = writeln!(s, "\n{:>6} {:>10} {:>10}", "spins", "frac_small", "frobenius");
        for f in &out.full_cw {
            let _ = writeln!(s, "{:>6} {:>10.4} {:>10.4}", f.spins, f.frac_small, f.frobenius_stat);
        }
    }
    if out.nonconverged_nodes > 0 {
        let _ = writeln!(s, "\ncandidate-symbol nodes without a settled limit: {}", out.nonconverged_nodes);
    }
    if !out.notes.is_empty() {
        s.push('\n');
        for note in &out.notes {
            let _ = writeln!(s, "{note}");
        }
    }
    s
}
