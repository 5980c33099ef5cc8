//! Spectral checks: sorted-eigenvalue versus symbol-quantile comparison,
//! zero-distribution statistics and extremal-eigenvalue decay tables.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvals_hermitian, schatten_norm, HermitianMatrix, Matrix};
use crate::symbols::{rearrange, GridSymbol};

/// Result of comparing one matrix spectrum against a symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub n: usize,
    pub sorted_eigenvalues: Vec<f64>,
    pub symbol_quantiles: Vec<f64>,
    pub sup_distance: f64,
    pub l1_distance: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub below_threshold_fraction: f64,
    pub threshold: f64,
}

impl SpectralReport {
    fn deviations(&self) -> Vec<f64> {
        self.sorted_eigenvalues.iter().zip(&self.symbol_quantiles).map(|(l, q)| (l - q).abs()).collect()
    }

    /// Sup distance after dropping the `k` largest deviations (outliers).
    pub fn trimmed_sup_distance(&self, k: usize) -> f64 {
        let mut d = self.deviations();
        d.sort_by(f64::total_cmp);
        let keep = d.len().saturating_sub(k);
        d[..keep].last().copied().unwrap_or(0.0)
    }

    /// Spectral condition number, when the spectrum is positive.
    pub fn condition_number(&self) -> Option<f64> {
        (self.lambda_min > 0.0).then(|| self.lambda_max / self.lambda_min)
    }

    /// Fraction of eigenvalues with `|lambda| <= t`.
    pub fn fraction_below(&self, t: f64) -> f64 {
        fraction_below(&self.sorted_eigenvalues, t)
    }

    /// Eigenvalues above the largest symbol quantile by more than `tol`:
    /// their count and the largest excess.
    pub fn outliers_above(&self, tol: f64) -> (usize, f64) {
        let top = self.symbol_quantiles.last().copied().unwrap_or(f64::NEG_INFINITY);
        self.sorted_eigenvalues
            .iter()
            .filter(|&&l| l > top + tol)
            .fold((0, 0.0), |(c, m), &l| (c + 1, f64::max(m, l - top)))
    }
}

fn fraction_below(sorted: &[f64], t: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.iter().filter(|l| l.abs() <= t).count() as f64 / sorted.len() as f64
}

/// Nearest-rank resampling of a sorted sample to `m` points:
/// `q_i = Q[ceil(i L / m) - 1]` for `i = 1..m`.
pub fn quantiles(sorted: &[f64], m: usize) -> Vec<f64> {
    let len = sorted.len();
    if len == 0 {
        return Vec::new();
    }
    (1..=m)
        .map(|i| {
            let idx = (i * len).div_ceil(m);
            sorted[idx.clamp(1, len) - 1]
        })
        .collect()
}

/// Compare already computed eigenvalues with a sorted symbol sample.
pub fn compare_eigenvalues(n: usize, mut eigenvalues: Vec<f64>, symbol_sorted: &[f64], threshold: f64) -> SpectralReport {
    eigenvalues.sort_by(f64::total_cmp);
    let dn = eigenvalues.len();
    let q = quantiles(symbol_sorted, dn);
    let (mut sup, mut l1) = (0.0f64, 0.0);
    for (l, s) in eigenvalues.iter().zip(&q) {
        let d = (l - s).abs();
        sup = sup.max(d);
        l1 += d;
    }
    SpectralReport {
        n,
        lambda_min: eigenvalues.first().copied().unwrap_or(f64::NAN),
        lambda_max: eigenvalues.last().copied().unwrap_or(f64::NAN),
        below_threshold_fraction: fraction_below(&eigenvalues, threshold),
        sup_distance: sup,
        l1_distance: if dn > 0 { l1 / dn as f64 } else { 0.0 },
        sorted_eigenvalues: eigenvalues,
        symbol_quantiles: q,
        threshold,
    }
}

/// Eigenvalues of `a` against the monotone rearrangement of `g`. The
/// report's `n` is the matrix order; callers may overwrite it.
pub fn compare_distribution(a: &HermitianMatrix, g: &GridSymbol, threshold: f64) -> Result<SpectralReport> {
    let sorted = rearrange(g)?;
    let eig = eigvals_hermitian(a)?;
    Ok(compare_eigenvalues(a.order(), eig, &sorted, threshold))
}

pub type MatrixBuilder = Arc<dyn Fn(usize) -> Result<Matrix> + Send + Sync>;

/// A matrix-sequence sampled at increasing sizes.
#[derive(Clone)]
pub struct SequenceSpec {
    pub label: String,
    sizes: Vec<usize>,
    builder: MatrixBuilder,
}

impl std::fmt::Debug for SequenceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SequenceSpec").field("label", &self.label).field("sizes", &self.sizes).finish()
    }
}

impl SequenceSpec {
    pub fn new(
        label: impl Into<String>,
        sizes: Vec<usize>,
        builder: impl Fn(usize) -> Result<Matrix> + Send + Sync + 'static,
    ) -> Result<Self> {
        if sizes.is_empty() || sizes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!("sizes must be strictly increasing, got {sizes:?}")));
        }
        Ok(Self { label: label.into(), sizes, builder: Arc::new(builder) })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn build(&self, n: usize) -> Result<Matrix> {
        (self.builder)(n)
    }
}

/// Normalized Schatten statistic per size.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroDistribution {
    pub p: f64,
    /// `(n, ||A_n||_p / d_n^{1/p})`.
    pub values: Vec<(usize, f64)>,
    /// Strictly decreasing across the size list.
    pub decreasing: bool,
}

pub fn zero_distribution_test(spec: &SequenceSpec, p: f64) -> Result<ZeroDistribution> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Schatten index must be in [1, inf], got {p}")));
    }
    let values = spec
        .sizes()
        .par_iter()
        .map(|&n| {
            let a = spec.build(n)?;
            let dn = a.rows() as f64;
            let norm = schatten_norm(&a, p)?;
            let scale = if p.is_infinite() { 1.0 } else { dn.powf(1.0 / p) };
            Ok((n, norm / scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ZeroDistribution { p, values, decreasing })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Base2,
    Natural,
    Base10,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Base2 => x.log2(),
            LogBase::Natural => x.ln(),
            LogBase::Base10 => x.log10(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base2" | "2" | "log2" => Ok(LogBase::Base2),
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "base10" | "10" | "log10" => Ok(LogBase::Base10),
            _ => Err(Error::Parse(format!("unknown log base `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    /// The extremal eigenvalue.
    pub value: f64,
    /// Gap to the reference, oriented to be positive.
    pub tau: f64,
    /// `log(tau_j / tau_{j+1})`; absent for the last row and flagged rows.
    pub alpha: Option<f64>,
    /// The gap is not positive, so the reference is not a bound.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub which: Extremum,
    pub reference: f64,
    pub base: LogBase,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    pub fn alphas(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.alpha).collect()
    }
}

/// Build a decay table from precomputed extremal eigenvalues.
pub fn decay_table_from_values(
    sizes: &[usize],
    values: &[f64],
    reference: f64,
    which: Extremum,
    base: LogBase,
) -> Result<DecayTable> {
    if sizes.len() != values.len() {
        return Err(Error::Shape("one value per size expected".into()));
    }
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter("decay tables need at least two sizes".into()));
    }
    let taus: Vec<f64> = values
        .iter()
        .map(|&v| match which {
            Extremum::Min => v - reference,
            Extremum::Max => reference - v,
        })
        .collect();
    let rows = (0..sizes.len())
        .map(|j| {
            let flagged = !(taus[j] > 0.0);
            let alpha = taus
                .get(j + 1)
                .filter(|&&t| t > 0.0 && !flagged)
                .map(|&t| base.log(taus[j] / t));
            DecayRow { n: sizes[j], value: values[j], tau: taus[j], alpha, flagged }
        })
        .collect();
    Ok(DecayTable { which, reference, base, rows })
}

/// Extremal eigenvalue of every matrix in `spec` against `reference`.
pub fn extremal_decay(spec: &SequenceSpec, reference: f64, which: Extremum, base: LogBase) -> Result<DecayTable> {
    let values = spec
        .sizes()
        .par_iter()
        .map(|&n| {
            let a = HermitianMatrix::new(spec.build(n)?)?;
            let l = eigvals_hermitian(&a)?;
            Ok(match which {
                Extremum::Min => l[0],
                Extremum::Max => l[l.len() - 1],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    decay_table_from_values(spec.sizes(), &values, reference, which, base)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub unperturbed: SpectralReport,
    pub perturbed: SpectralReport,
    /// Spectral norm of the perturbation.
    pub perturbation_norm: f64,
    /// Largest shift between sorted eigenvalues.
    pub max_eigenvalue_shift: f64,
}

/// Compare `B` and the Hermitian part of `B + C` against the same symbol.
/// By Weyl's inequality the shift is at most `||C||`.
pub fn small_norm_perturbation_check(
    b: &HermitianMatrix,
    c: &Matrix,
    g: &GridSymbol,
    threshold: f64,
) -> Result<PerturbationReport> {
    if c.rows() != b.order() || c.cols() != b.order() {
        return Err(Error::Shape("perturbation must match the matrix order".into()));
    }
    let unperturbed = compare_distribution(b, g, threshold)?;
    let sum = HermitianMatrix::from_hermitian_part(&(b.as_matrix() + c));
    let perturbed = compare_distribution(&sum, g, threshold)?;
    let shift = unperturbed
        .sorted_eigenvalues
        .iter()
        .zip(&perturbed.sorted_eigenvalues)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(PerturbationReport {
        perturbation_norm: schatten_norm(c, f64::INFINITY)?,
        max_eigenvalue_shift: shift,
        unperturbed,
        perturbed,
    })
}
