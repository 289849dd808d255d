//! Mixed L_λ-affine surface areas, their i-th variants and the `±∞` endpoints.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::divergence::{self, Term};
use crate::error::{Error, Result};
use crate::function::{FunctionVector, LogConcaveFunction};
use crate::generator::Generator;
use crate::linalg::Vector;
use crate::quadrature::{self, IntegrationResult, QuadratureSpec};

/// Surface-area parameter: a finite `λ` or one of the endpoints `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl FromStr for Lambda {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(Lambda::PlusInfinity),
            "-inf" | "-infinity" => Ok(Lambda::MinusInfinity),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Lambda::Finite)
                .ok_or_else(|| Error::InvalidArgument(format!("invalid λ: {s}"))),
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(v) => write!(f, "{v}"),
            Lambda::PlusInfinity => write!(f, "inf"),
            Lambda::MinusInfinity => write!(f, "-inf"),
        }
    }
}

fn integrate_power(
    functions: &[&LogConcaveFunction],
    lambda: f64,
    exponents: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("λ must be finite here, got {lambda}")));
    }
    let terms: Vec<Term<'_>> = functions
        .iter()
        .zip(exponents)
        .map(|(f, &e)| Term {
            function: f,
            generator: Generator::power(lambda),
            exponent: e,
            swapped: false,
        })
        .collect();
    divergence::integrate_terms(&terms, spec)
}

/// `as_λ(φ⃗) = ∫ Π [e^{(2λ−1)ψᵢ − λ⟨x,∇ψᵢ⟩}(det Hess ψᵢ)^λ]^{1/n} dx` for finite `λ`.
pub fn as_lambda(functions: &FunctionVector, lambda: f64, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    let n = functions.len() as f64;
    let fs: Vec<&LogConcaveFunction> = functions.iter().collect();
    integrate_power(&fs, lambda, &vec![1.0 / n; fs.len()], spec)
}

/// i-th mixed surface area with exponents `i/n_w` and `(n_w−i)/n_w`.
pub fn as_lambda_i(
    phi1: &LogConcaveFunction,
    phi2: &LogConcaveFunction,
    lambda: f64,
    i: f64,
    n_w: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    divergence::check_ith(phi1, phi2, i, n_w)?;
    integrate_power(&[phi1, phi2], lambda, &[i / n_w, (n_w - i) / n_w], spec)
}

/// Best value found for `as_∞` and where it was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsInfinity {
    pub value: f64,
    pub maximizer: Vec<f64>,
}

/// `Σ eᵢ (2ψᵢ − ⟨x,∇ψᵢ⟩ + log det Hess ψᵢ)` at `x`.
fn log_maximand(functions: &[&LogConcaveFunction], weights: &[f64], x: &Vector) -> Result<f64> {
    let mut s = 0.0;
    for (f, &w) in functions.iter().zip(weights) {
        if w != 0.0 {
            s += w * f.potential_jet(x)?.log_ratio(x);
        }
    }
    Ok(s)
}

fn weighted_infinity(functions: &[&LogConcaveFunction], weights: &[f64]) -> Result<AsInfinity> {
    let frame = divergence::frame_for(functions, weights)?;
    let m = quadrature::maximize(|x| log_maximand(functions, weights, x), &frame)?;
    Ok(AsInfinity {
        value: m.value.exp(),
        maximizer: m.point.iter().copied().collect(),
    })
}

/// `as_∞(φ⃗) = max_x Π [e^{2ψᵢ − ⟨x,∇ψᵢ⟩} det Hess ψᵢ]^{1/n}` (grid plus simplex search; best value found).
pub fn as_infinity(functions: &FunctionVector) -> Result<AsInfinity> {
    let fs: Vec<&LogConcaveFunction> = functions.iter().collect();
    let weights = vec![1.0 / fs.len() as f64; fs.len()];
    weighted_infinity(&fs, &weights)
}

/// i-th version of [`as_infinity`] with exponents `i/n_w` and `(n_w−i)/n_w`.
pub fn as_infinity_i(phi1: &LogConcaveFunction, phi2: &LogConcaveFunction, i: f64, n_w: f64) -> Result<AsInfinity> {
    divergence::check_ith(phi1, phi2, i, n_w)?;
    weighted_infinity(&[phi1, phi2], &[i / n_w, (n_w - i) / n_w])
}

/// `as_{−∞,i} = 1/as_{∞,i}`.
pub fn as_minus_infinity_i(
    phi1: &LogConcaveFunction,
    phi2: &LogConcaveFunction,
    i: f64,
    n_w: f64,
) -> Result<AsInfinity> {
    let r = as_infinity_i(phi1, phi2, i, n_w)?;
    Ok(AsInfinity {
        value: 1.0 / r.value,
        maximizer: r.maximizer,
    })
}

/// `as_{−∞} = 1/as_∞`.
pub fn as_minus_infinity(functions: &FunctionVector) -> Result<AsInfinity> {
    let r = as_infinity(functions)?;
    Ok(AsInfinity {
        value: 1.0 / r.value,
        maximizer: r.maximizer,
    })
}

/// Keeps the first `n−m` entries and fills the last `m` with entry `k` (1-based).
pub fn repeat_vector(functions: &FunctionVector, m: usize, k: usize) -> Result<FunctionVector> {
    let n = functions.len();
    if m < 1 || m >= n.max(1) {
        return Err(Error::IndexOutOfRange(format!("m = {m} must satisfy 1 ≤ m ≤ n−1 = {}", n.saturating_sub(1))));
    }
    if k <= n - m || k > n {
        return Err(Error::IndexOutOfRange(format!("k = {k} must satisfy {} < k ≤ {n}", n - m)));
    }
    let mut out: Vec<LogConcaveFunction> = functions.as_slice()[..n - m].to_vec();
    out.extend(std::iter::repeat_n(functions[k - 1].clone(), m));
    FunctionVector::new(out)
}

/// Generic form of [`repeat_vector`] for any per-entry data (generators, parameters).
pub fn repeat_entries<T: Clone>(items: &[T], m: usize, k: usize) -> Result<Vec<T>> {
    let n = items.len();
    if m < 1 || m >= n.max(1) || k <= n - m || k > n {
        return Err(Error::IndexOutOfRange(format!("invalid (m, k) = ({m}, {k}) for n = {n}")));
    }
    let mut out = items[..n - m].to_vec();
    out.extend(std::iter::repeat_n(items[k - 1].clone(), m));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::GaussianParams;
    use crate::linalg::Matrix;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::gauss_hermite(20)
    }

    #[test]
    fn standard_gaussian_pair() {
        let fv = FunctionVector::repeated(&LogConcaveFunction::standard_gaussian(2), 2).unwrap();
        for l in [0.0, 0.5, 1.0] {
            assert!((as_lambda(&fv, l, &spec()).unwrap().value - 2.0 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn single_gaussian_half() {
        let a = Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, 4.0]));
        let g = LogConcaveFunction::gaussian(&GaussianParams::new(1.0, a).unwrap()).unwrap();
        let fv = FunctionVector::new(vec![g]).unwrap();
        assert!((as_lambda(&fv, 0.5, &spec()).unwrap().value - 2.0 * PI).abs() < 1e-10);
        let inf = as_infinity(&fv).unwrap();
        assert!((inf.value - 4.0).abs() < 1e-12);
        assert!((as_minus_infinity(&fv).unwrap().value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn repeat_examples() {
        let fs: Vec<LogConcaveFunction> = (1..=4).map(|k| LogConcaveFunction::cosh(1).scaled(k as f64).unwrap()).collect();
        let fv = FunctionVector::new(fs[..3].to_vec()).unwrap();
        let scales = |v: &FunctionVector| v.iter().map(|f| f.scale().round() as i32).collect::<Vec<_>>();
        assert_eq!(scales(&repeat_vector(&fv, 1, 3).unwrap()), vec![1, 2, 3]);
        assert_eq!(scales(&repeat_vector(&fv, 2, 3).unwrap()), vec![1, 3, 3]);
        let fv4 = FunctionVector::new(fs).unwrap();
        assert_eq!(scales(&repeat_vector(&fv4, 2, 4).unwrap()), vec![1, 2, 4, 4]);
        assert!(matches!(repeat_vector(&fv, 0, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(repeat_vector(&fv, 2, 1), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(repeat_vector(&fv, 3, 3), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn lambda_parsing() {
        assert_eq!("inf".parse::<Lambda>().unwrap(), Lambda::PlusInfinity);
        assert_eq!("-inf".parse::<Lambda>().unwrap(), Lambda::MinusInfinity);
        assert_eq!("0.25".parse::<Lambda>().unwrap(), Lambda::Finite(0.25));
        assert!("nan".parse::<Lambda>().is_err());
    }
}
