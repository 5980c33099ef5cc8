use std::sync::Arc;

use evalexpr::{ContextWithMutableVariables, HashMapContext, Node, Value};
use glt_lab::discretizations::{
    bspline_toeplitz, curie_weiss_full, curie_weiss_restricted, fd4_matrix, fd4_matrix_2d, BsplineKind, BsplineWhich,
    CWParams, CwConvention,
};
use glt_lab::structured::{circulant, diagonal_sampling, hankel, omega_circulant, tau_matrix, toeplitz, MultiIndex, SamplingFn};
use glt_lab::symbols::TrigPolynomial;
use glt_lab::{Matrix, C64};

use crate::args::{BuildArgs, Convention, Family, Which};
use crate::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_complex(s: &str) -> CliResult<C64> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("not a number: `{t}`")));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(usage(format!("expected `re` or `re:im`, got `{s}`"))),
    }
}

/// `"0:2,1:-1,-1:-1"` -> `[(0, 2), (1, -1), (-1, -1)]`; a third field is the imaginary part.
pub fn parse_coeffs(s: &str) -> CliResult<Vec<(i64, C64)>> {
    let mut out: Vec<(i64, C64)> = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (k, v) = item.split_once(':').ok_or_else(|| usage(format!("coefficient `{item}` is not `k:value`")))?;
        let k: i64 = k.trim().parse().map_err(|_| usage(format!("bad coefficient index `{k}`")))?;
        let v = parse_complex(v)?;
        match out.iter_mut().find(|(kk, _)| *kk == k) {
            Some(e) => e.1 += v,
            None => out.push((k, v)),
        }
    }
    if out.is_empty() {
        return Err(usage("--coeffs is empty"));
    }
    Ok(out)
}

/// Dense vector of length `len` with `v[k mod len] += c_k`.
fn wrap_coeffs(pairs: &[(i64, C64)], len: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); len];
    for &(k, c) in pairs {
        v[k.rem_euclid(len as i64) as usize] += c;
    }
    v
}

/// Real function of `x` (and `y`) from an expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn parse(s: &str) -> CliResult<Self> {
        evalexpr::build_operator_tree(s).map(|n| Expr(Arc::new(n))).map_err(|e| usage(format!("--func `{s}`: {e}")))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut ctx = HashMapContext::new();
        for (name, &v) in ["x", "y"].iter().zip(x) {
            ctx.set_value((*name).into(), Value::Float(v)).expect("fresh context");
        }
        self.0.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
    }

    /// Evaluate once to surface unknown variables or functions as usage errors.
    fn check(&self, d: usize) -> CliResult<()> {
        let mut ctx = HashMapContext::new();
        for name in ["x", "y"].iter().take(d) {
            ctx.set_value((*name).into(), Value::Float(0.5)).expect("fresh context");
        }
        self.0.eval_number_with_context(&ctx).map(|_| ()).map_err(|e| usage(format!("--func: {e}")))
    }
}

fn single_n(a: &BuildArgs) -> CliResult<usize> {
    match a.n.as_slice() {
        [n] if *n > 0 => Ok(*n),
        _ => Err(usage(format!("{:?} needs one positive --n", a.family))),
    }
}

fn coeffs(a: &BuildArgs) -> CliResult<Vec<(i64, C64)>> {
    parse_coeffs(a.coeffs.as_deref().ok_or_else(|| usage(format!("{:?} needs --coeffs", a.family)))?)
}

fn func(a: &BuildArgs, d: usize, default: &str) -> CliResult<Expr> {
    let e = Expr::parse(a.func.as_deref().unwrap_or(default))?;
    e.check(d)?;
    Ok(e)
}

pub fn build(a: &BuildArgs) -> CliResult<Matrix> {
    let m = match a.family {
        Family::Toeplitz => toeplitz(&MultiIndex::uni(single_n(a)?), &TrigPolynomial::scalar_complex(&coeffs(a)?))?,
        Family::Circulant => circulant(&wrap_coeffs(&coeffs(a)?, single_n(a)?)),
        Family::Omega => {
            let w = parse_complex(a.omega.as_deref().ok_or_else(|| usage("omega needs --omega"))?)?;
            omega_circulant(w, &wrap_coeffs(&coeffs(a)?, single_n(a)?))?
        }
        Family::Tau => {
            let n = single_n(a)?;
            let c = coeffs(a)?;
            if c.iter().any(|&(k, _)| k < 0 || k as usize >= n) {
                return Err(usage("tau coefficients are indexed 0..n-1"));
            }
            tau_matrix(&wrap_coeffs(&c, n))
        }
        Family::Hankel => {
            let n = single_n(a)?;
            let c = coeffs(a)?;
            if c.iter().any(|&(k, _)| k < 0 || k as usize > 2 * n - 2) {
                return Err(usage("Hankel coefficients are indexed by i + j in 0..2n-2"));
            }
            hankel(n, &wrap_coeffs(&c, 2 * n - 1))?
        }
        Family::Diag => {
            let d = a.n.len();
            if !(1..=2).contains(&d) {
                return Err(usage("diag takes --n n or --n n1,n2"));
            }
            let e = func(a, d, "x")?;
            diagonal_sampling(&MultiIndex::new(a.n.clone())?, &SamplingFn::scalar(d, move |x| e.eval(x)))?
        }
        Family::Fd4 => {
            let e = func(a, 1, "x")?;
            fd4_matrix(single_n(a)?, |x| e.eval(&[x]))
        }
        Family::Fd42d => {
            let [n1, n2] = a.n[..] else {
                return Err(usage("fd4-2d takes --n n1,n2"));
            };
            let e = func(a, 1, "x")?;
            fd4_matrix_2d(n1, n2, |x| e.eval(&[x]))
        }
        Family::Bspline => {
            let kind = match a.degree {
                2 => BsplineKind::QuadraticC0,
                3 => BsplineKind::CubicC1,
                d => return Err(usage(format!("--degree must be 2 or 3, got {d}"))),
            };
            let which = match a.which {
                Which::Stiffness => BsplineWhich::Stiffness,
                Which::Mass => BsplineWhich::Mass,
                Which::Sum => BsplineWhich::Sum,
            };
            bspline_toeplitz(kind, which, single_n(a)?)?
        }
        Family::CwRestricted => {
            let order = single_n(a)?;
            if order < 2 {
                return Err(usage("cw-restricted needs order N + 1 >= 2"));
            }
            let conv = match a.convention {
                Convention::Midpoint => CwConvention::Midpoint,
                Convention::Spin => CwConvention::SpinBasis,
            };
            curie_weiss_restricted(&CWParams::new(a.gamma, a.b, order - 1)?, conv)
        }
        Family::CwFull => curie_weiss_full(&CWParams::new(a.gamma, a.b, single_n(a)?)?)?,
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_lists() {
        let c = parse_coeffs("0:2, 1:-1,-1:-1:0.5,1:0.5").unwrap();
        assert_eq!(c, vec![(0, C64::new(2.0, 0.0)), (1, C64::new(-0.5, 0.0)), (-1, C64::new(-1.0, 0.5))]);
        assert!(parse_coeffs("").is_err());
        assert!(parse_coeffs("a:1").is_err());
        assert!(parse_coeffs("1-2").is_err());
    }

    #[test]
    fn wrapped_coefficients() {
        let v = wrap_coeffs(&[(-1, C64::new(3.0, 0.0)), (1, C64::new(1.0, 0.0))], 4);
        assert_eq!(v[3].re, 3.0);
        assert_eq!(v[1].re, 1.0);
    }

    #[test]
    fn expressions() {
        let e = Expr::parse("x^2 + 2 * y").unwrap();
        assert_eq!(e.eval(&[3.0, 0.5]), 10.0);
        assert!(Expr::parse("x +").and_then(|e| e.check(1)).is_err());
        assert!(Expr::parse("z").unwrap().check(1).is_err());
    }
}
