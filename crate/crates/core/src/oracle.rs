//! Closed-form values for Gaussian inputs `c·e^{-⟨Ax,x⟩/2}` and the matrix
//! Brunn–Minkowski chain.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{FunctionVector, GaussianParams, LogConcaveFunction};
use crate::generator::{self, Generator};
use crate::linalg::{self, Matrix};

/// A list of Gaussian parameters sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVector {
    params: Vec<GaussianParams>,
}

impl GaussianVector {
    pub fn new(params: Vec<GaussianParams>) -> Result<Self> {
        let first = params
            .first()
            .ok_or_else(|| Error::InvalidArgument("Gaussian vector must be non-empty".into()))?;
        let d = first.dim();
        for p in &params {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            linalg::check_spd(&p.a)?;
        }
        Ok(GaussianVector { params })
    }

    pub fn dim(&self) -> usize {
        self.params[0].dim()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[GaussianParams] {
        &self.params
    }

    pub fn functions(&self) -> Result<FunctionVector> {
        FunctionVector::new(
            self.params
                .iter()
                .map(LogConcaveFunction::gaussian)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Extracts the parameters of an all-Gaussian function vector.
    pub fn from_functions(fv: &FunctionVector) -> Option<Self> {
        let params: Option<Vec<_>> = fv.iter().map(|f| f.gaussian_params()).collect();
        params.and_then(|p| Self::new(p).ok())
    }
}

/// `log[(2π n_w)^{d/2} det(Σ wᵢAᵢ)^{-1/2}]` with `Σ wᵢ = n_w` implied by the caller.
fn log_prefactor(d: usize, n_w: f64, weighted_sum: &Matrix) -> Result<f64> {
    let ld = linalg::log_det_spd(weighted_sum)?;
    Ok(0.5 * d as f64 * (2.0 * std::f64::consts::PI * n_w).ln() - 0.5 * ld)
}

/// `∫ Π [cᵢ e^{-⟨Aᵢx,x⟩/2} fᵢ(det Aᵢ/cᵢ²)]^{eᵢ} dx` with weights `eᵢ` summing to one.
fn weighted_closed_form(params: &[&GaussianParams], gens: &[Generator], exps: &[f64]) -> Result<f64> {
    let d = params[0].dim();
    let mut sum = Matrix::zeros(d, d);
    let mut factors = Vec::with_capacity(params.len());
    for ((p, g), &e) in params.iter().zip(gens).zip(exps) {
        sum += &p.a * e;
        let log_t = linalg::log_det_spd(&p.a)? - 2.0 * p.c.ln();
        factors.push((g.eval_log(log_t).times_exp(p.c.ln()), e));
    }
    let product = generator::weighted_product(&factors)?;
    // ∫ e^{-⟨Sx,x⟩/2} = (2π)^{d/2} det(S)^{-1/2}
    Ok(product * log_prefactor(d, 1.0, &sum)?.exp())
}

/// `(2πn)^{d/2} det(ΣAᵢ)^{-1/2} Π[cᵢ fᵢ(det Aᵢ/cᵢ²)]^{1/n}`.
pub fn oracle_mixed(gv: &GaussianVector, gens: &[Generator]) -> Result<f64> {
    if gens.len() != gv.len() {
        return Err(Error::InvalidArgument("one generator per Gaussian required".into()));
    }
    let n = gv.len() as f64;
    let ps: Vec<&GaussianParams> = gv.params.iter().collect();
    weighted_closed_form(&ps, gens, &vec![1.0 / n; ps.len()])
}

/// `(2π)^{d/2} c f(det A/c²) / √det A`.
pub fn oracle_classical(g: &GaussianParams, f: Generator) -> Result<f64> {
    weighted_closed_form(&[g], &[f], &[1.0])
}

/// `(2πn)^{d/2} det(ΣAᵢ)^{-1/2} Π[cᵢ^{1−2λ} det(Aᵢ)^λ]^{1/n}`.
pub fn oracle_as_lambda(gv: &GaussianVector, lambda: f64) -> Result<f64> {
    oracle_mixed(gv, &vec![Generator::power(lambda); gv.len()])
}

/// Two-function version with exponents `i/n_w`, `(n_w−i)/n_w`:
/// `(2πn_w)^{d/2} det(iA₁+(n_w−i)A₂)^{-1/2} Π[cₗ fₗ(det Aₗ/cₗ²)]^{eₗ}`.
pub fn oracle_ith_mixed(
    g1: &GaussianParams,
    g2: &GaussianParams,
    f1: Generator,
    f2: Generator,
    i: f64,
    n_w: f64,
) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            expected: g1.dim(),
            got: g2.dim(),
        });
    }
    weighted_closed_form(&[g1, g2], &[f1, f2], &[i / n_w, (n_w - i) / n_w])
}

/// i-th mixed surface area of a Gaussian pair.
pub fn oracle_as_lambda_i(g1: &GaussianParams, g2: &GaussianParams, lambda: f64, i: f64, n_w: f64) -> Result<f64> {
    oracle_ith_mixed(g1, g2, Generator::power(lambda), Generator::power(lambda), i, n_w)
}

/// `(1/c, A⁻¹)`.
pub fn oracle_dual(g: &GaussianParams) -> Result<GaussianParams> {
    GaussianParams::new(1.0 / g.c, linalg::inverse_spd(&g.a)?)
}

/// `Ω = Π(det Aᵢ/cᵢ²)^{1/n}`.
pub fn oracle_omega(gv: &GaussianVector) -> Result<f64> {
    let n = gv.len() as f64;
    let mut s = 0.0;
    for p in &gv.params {
        s += (linalg::log_det_spd(&p.a)? - 2.0 * p.c.ln()) / n;
    }
    Ok(s.exp())
}

/// `as_∞ = Π(det Aᵢ/cᵢ²)^{1/n}` (constant maximand).
pub fn oracle_as_infinity(gv: &GaussianVector) -> Result<f64> {
    oracle_omega(gv)
}

/// Slacks of the matrix Brunn–Minkowski inequality and its geometric–arithmetic chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrunnMinkowskiReport {
    /// `det(ΣAᵢ)^{1/d}`
    pub bmi_lhs: f64,
    /// `Σ det(Aᵢ)^{1/d}`
    pub bmi_rhs: f64,
    /// `bmi_lhs − bmi_rhs ≥ 0`
    pub bmi_slack: f64,
    /// `Π det(Aᵢ)^{1/n}`
    pub geometric: f64,
    /// `((1/n) Σ det(Aᵢ)^{1/d})^d`
    pub arithmetic: f64,
    /// `n^{-d} det(ΣAᵢ)`
    pub upper: f64,
    /// `arithmetic − geometric ≥ 0`
    pub ga_slack: f64,
    /// `upper − arithmetic ≥ 0`
    pub bm_slack: f64,
}

/// Evaluates `Π det^{1/n} ≤ ((1/n)Σ det^{1/d})^d ≤ n^{-d} det(ΣAᵢ)` together with
/// `det(ΣAᵢ)^{1/d} ≥ Σ det(Aᵢ)^{1/d}`.
pub fn matrix_bm_check(matrices: &[Matrix]) -> Result<BrunnMinkowskiReport> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one matrix".into()))?;
    let d = first.nrows();
    let n = matrices.len() as f64;
    let df = d as f64;
    let mut sum = Matrix::zeros(d, d);
    let mut root_sum = 0.0;
    let mut log_geo = 0.0;
    for a in matrices {
        if a.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.nrows(),
            });
        }
        let ld = linalg::log_det_spd(a)?;
        sum += a;
        root_sum += (ld / df).exp();
        log_geo += ld / n;
    }
    let ld_sum = linalg::log_det_spd(&sum)?;
    let bmi_lhs = (ld_sum / df).exp();
    let geometric = log_geo.exp();
    let arithmetic = (root_sum / n).powi(d as i32);
    let upper = (ld_sum - df * n.ln()).exp();
    Ok(BrunnMinkowskiReport {
        bmi_lhs,
        bmi_rhs: root_sum,
        bmi_slack: bmi_lhs - root_sum,
        geometric,
        arithmetic,
        upper,
        ga_slack: arithmetic - geometric,
        bm_slack: upper - arithmetic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use std::f64::consts::PI;

    fn diag(xs: &[f64]) -> Matrix {
        Matrix::from_diagonal(&Vector::from_row_slice(xs))
    }

    fn gp(c: f64, a: Matrix) -> GaussianParams {
        GaussianParams::new(c, a).unwrap()
    }

    #[test]
    fn mixed_examples() {
        let gv = GaussianVector::new(vec![gp(1.0, diag(&[1.0, 1.0])); 2]).unwrap();
        let v = oracle_mixed(&gv, &[Generator::power(0.7); 2]).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-13);
        let gv = GaussianVector::new(vec![gp(1.0, diag(&[1.0, 1.0])), gp(2.0, diag(&[2.0, 2.0]))]).unwrap();
        let v = oracle_mixed(&gv, &[Generator::power(1.0); 2]).unwrap();
        assert!((v - 4.0 * 2f64.sqrt() * PI / 3.0).abs() < 1e-13);
        assert!((v - 5.92384).abs() < 1e-5);
    }

    #[test]
    fn equal_entries_reduce_to_classical() {
        let g = gp(1.7, Matrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]));
        let gv = GaussianVector::new(vec![g.clone(); 3]).unwrap();
        let f = Generator::power(0.3);
        let a = oracle_mixed(&gv, &[f; 3]).unwrap();
        let b = oracle_classical(&g, f).unwrap();
        let det = linalg::det_spd(&g.a).unwrap();
        let by_hand = 2.0 * PI * g.c * (det / (g.c * g.c)).powf(0.3) / det.sqrt();
        assert!((a / b - 1.0).abs() < 1e-13);
        assert!((b / by_hand - 1.0).abs() < 1e-13);
    }

    #[test]
    fn surface_examples() {
        let gv = GaussianVector::new(vec![gp(1.0, diag(&[1.0, 4.0]))]).unwrap();
        assert!((oracle_as_lambda(&gv, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let std = GaussianVector::new(vec![gp(1.0, diag(&[1.0, 1.0, 1.0]))]).unwrap();
        for l in [-0.3, 0.0, 0.5, 2.0] {
            let v = oracle_as_lambda(&std, l).unwrap();
            assert!((v - (2.0 * PI).powf(1.5)).abs() < 1e-12);
        }
        let g1 = gp(1.3, diag(&[2.0, 0.5]));
        let g2 = gp(0.7, diag(&[1.0, 3.0]));
        let at0 = oracle_as_lambda_i(&g1, &g2, 0.4, 0.0, 2.0).unwrap();
        let single = oracle_as_lambda(&GaussianVector::new(vec![g2]).unwrap(), 0.4).unwrap();
        assert!((at0 / single - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dual_examples() {
        let d = oracle_dual(&gp(2.0, diag(&[2.0, 0.5]))).unwrap();
        assert_eq!(d.c, 0.5);
        assert!((d.a - diag(&[0.5, 2.0])).amax() < 1e-15);
        let g = gp(1.3, Matrix::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0]));
        let back = oracle_dual(&oracle_dual(&g).unwrap()).unwrap();
        assert!((back.c - g.c).abs() < 1e-15 && (back.a - &g.a).amax() < 1e-14);
    }

    #[test]
    fn brunn_minkowski_examples() {
        let r = matrix_bm_check(&[diag(&[1.0, 1.0]), diag(&[1.0, 1.0])]).unwrap();
        assert!(r.bmi_slack.abs() < 1e-14 && r.ga_slack.abs() < 1e-14 && r.bm_slack.abs() < 1e-14);
        let r = matrix_bm_check(&[diag(&[1.0, 4.0]), diag(&[1.0, 1.0])]).unwrap();
        assert!((r.bmi_lhs - 10f64.sqrt()).abs() < 1e-14);
        assert!((r.bmi_slack - (10f64.sqrt() - 3.0)).abs() < 1e-14);
        let r = matrix_bm_check(&[diag(&[2.0, 2.0]), diag(&[1.0, 1.0])]).unwrap();
        assert!(r.bmi_slack.abs() < 1e-14);
        assert!(r.ga_slack > 0.1);
    }
}
