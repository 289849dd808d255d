//! Classical, mixed and i-th mixed f-divergences of log-concave functions,
//! and the Ω invariant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{self, FunctionVector, LogConcaveFunction};
use crate::generator::{self, Generator, SignedLog};
use crate::linalg::{self, Matrix, Vector};
use crate::quadrature::{self, IntegrationResult, LaplaceFrame, QuadratureSpec};

/// A function vector paired with generators and the exponent denominator `n_w`.
#[derive(Debug, Clone)]
pub struct DivergenceInstance {
    functions: FunctionVector,
    generators: Vec<Generator>,
    n_w: f64,
}

impl DivergenceInstance {
    /// Instance with `n_w` equal to the vector length.
    pub fn new(functions: FunctionVector, generators: Vec<Generator>) -> Result<Self> {
        let n = functions.len() as f64;
        Self::with_weight(functions, generators, n)
    }

    pub fn with_weight(functions: FunctionVector, generators: Vec<Generator>, n_w: f64) -> Result<Self> {
        if generators.len() != functions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} generators for {} functions",
                generators.len(),
                functions.len()
            )));
        }
        if !(n_w > 0.0 && n_w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight denominator must be positive, got {n_w}")));
        }
        for g in &generators {
            g.validate()?;
        }
        Ok(DivergenceInstance {
            functions,
            generators,
            n_w,
        })
    }

    pub fn functions(&self) -> &FunctionVector {
        &self.functions
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn n_w(&self) -> f64 {
        self.n_w
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// One factor `[q f(p/q)]^e` of a product integrand.
#[derive(Clone, Copy)]
pub(crate) struct Term<'a> {
    pub function: &'a LogConcaveFunction,
    pub generator: Generator,
    pub exponent: f64,
    /// Evaluate as `p·f*(q/p)`, i.e. with the roles of `p` and `q` exchanged.
    pub swapped: bool,
}

/// Value of `Π [q f(p/q)]^e` at `x`.
pub(crate) fn product_integrand(terms: &[Term<'_>], x: &Vector) -> Result<f64> {
    let mut factors: Vec<(SignedLog, f64)> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.exponent == 0.0 {
            continue;
        }
        let jet = t.function.potential_jet(x)?;
        let lt = jet.log_ratio(x);
        let log_q = -jet.value;
        let factor = if t.swapped {
            t.generator.eval_log(-lt).times_exp(log_q + lt)
        } else {
            t.generator.eval_log(lt).times_exp(log_q)
        };
        if factor.is_infinite() && jet.log_det == f64::NEG_INFINITY {
            return Err(Error::SingularHessian);
        }
        factors.push((factor, t.exponent));
    }
    generator::weighted_product(&factors)
}

/// Laplace frame of `Σ wᵢψᵢ`; if that combination is not convex (negative
/// weights), the weights are clamped to `[0, ∞)` and renormalized to the same total.
pub(crate) fn frame_for(functions: &[&LogConcaveFunction], weights: &[f64]) -> Result<LaplaceFrame> {
    match function::weighted_frame(functions, weights) {
        Ok(f) => Ok(f),
        Err(Error::NonConvexPotential | Error::OptimizationFailed { .. }) => {
            let total: f64 = weights.iter().sum();
            let clamped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
            let s: f64 = clamped.iter().sum();
            let scale = if s > 0.0 && total > 0.0 { total / s } else { 1.0 };
            let w: Vec<f64> = clamped.iter().map(|w| w * scale).collect();
            function::weighted_frame(functions, &w)
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn integrate_terms(terms: &[Term<'_>], spec: &QuadratureSpec) -> Result<IntegrationResult> {
    let functions: Vec<&LogConcaveFunction> = terms.iter().map(|t| t.function).collect();
    let weights: Vec<f64> = terms.iter().map(|t| t.exponent).collect();
    let frame = frame_for(&functions, &weights)?;
    quadrature::integrate(|x| product_integrand(terms, x), &frame, spec)
}

/// `∫ φ f(p_φ/q_φ) dx`.
pub fn classical(f: Generator, phi: &LogConcaveFunction, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    f.validate()?;
    integrate_terms(
        &[Term {
            function: phi,
            generator: f,
            exponent: 1.0,
            swapped: false,
        }],
        spec,
    )
}

fn mixed_terms(inst: &DivergenceInstance, swapped: bool) -> Vec<Term<'_>> {
    inst.functions
        .iter()
        .zip(&inst.generators)
        .map(|(phi, &g)| Term {
            function: phi,
            generator: if swapped { g.adjoint() } else { g },
            exponent: 1.0 / inst.n_w,
            swapped,
        })
        .collect()
}

/// `∫ Π [φᵢ fᵢ(pᵢ/qᵢ)]^{1/n_w} dx`.
pub fn mixed(inst: &DivergenceInstance, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    integrate_terms(&mixed_terms(inst, false), spec)
}

/// `∫ Π [pᵢ fᵢ*(qᵢ/pᵢ)]^{1/n_w} dx`, the divergence with the roles of `p` and `q`
/// exchanged and adjoint generators; equals [`mixed`] analytically.
pub fn mixed_swapped(inst: &DivergenceInstance, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    integrate_terms(&mixed_terms(inst, true), spec)
}

/// `∫ Π [qᵢ log(pᵢ/qᵢ)]₊^{1/n} dx`.
pub fn mixed_kl(functions: &FunctionVector, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    let inst = DivergenceInstance::new(functions.clone(), vec![Generator::LogPlus; functions.len()])?;
    mixed(&inst, spec)
}

/// [`mixed_kl`] returning the best Gauss–Hermite estimate and its error even
/// when the kink of `[·]₊` keeps the target out of reach.
pub(crate) fn mixed_kl_best_effort(functions: &FunctionVector, spec: &QuadratureSpec) -> Result<IntegrationResult> {
    let inst = DivergenceInstance::new(functions.clone(), vec![Generator::LogPlus; functions.len()])?;
    let terms = mixed_terms(&inst, false);
    let fs: Vec<&LogConcaveFunction> = terms.iter().map(|t| t.function).collect();
    let weights: Vec<f64> = terms.iter().map(|t| t.exponent).collect();
    let frame = frame_for(&fs, &weights)?;
    quadrature::integrate_best_effort(|x| product_integrand(&terms, x), &frame, spec)
}

/// `∫ [f₁(p₁/q₁)q₁]^{i/n_w} [f₂(p₂/q₂)q₂]^{(n_w−i)/n_w} dx`.
pub fn ith_mixed(
    f1: Generator,
    f2: Generator,
    phi1: &LogConcaveFunction,
    phi2: &LogConcaveFunction,
    i: f64,
    n_w: f64,
    spec: &QuadratureSpec,
) -> Result<IntegrationResult> {
    check_ith(phi1, phi2, i, n_w)?;
    f1.validate()?;
    f2.validate()?;
    integrate_terms(
        &[
            Term {
                function: phi1,
                generator: f1,
                exponent: i / n_w,
                swapped: false,
            },
            Term {
                function: phi2,
                generator: f2,
                exponent: (n_w - i) / n_w,
                swapped: false,
            },
        ],
        spec,
    )
}

pub(crate) fn check_ith(phi1: &LogConcaveFunction, phi2: &LogConcaveFunction, i: f64, n_w: f64) -> Result<()> {
    if phi1.dim() != phi2.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi1.dim(),
            got: phi2.dim(),
        });
    }
    if !(n_w > 0.0 && n_w.is_finite()) || !i.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite i and n_w > 0, got i = {i}, n_w = {n_w}")));
    }
    Ok(())
}

/// The Ω invariant with its two constituent terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaResult {
    pub value: f64,
    pub log_value: f64,
    /// `D_KL(P_G‖Q_G)/∫G` for the geometric mean `G = Πφᵢ^{1/n}` (unclamped integrand).
    pub kl_term: f64,
    /// `∫ log(Π(det Hᵢ)^{1/n} / det((1/n)ΣHᵢ)) dμ`, always `≤ 0`.
    pub hessian_term: f64,
    /// `∫ G dx`.
    pub mass: f64,
    /// Propagated absolute error of `log_value`.
    pub error: f64,
    pub evaluations: usize,
}

/// `Ω = exp(D_KL(P_G‖Q_G)/∫G + ∫ log(Π(det Hᵢ)^{1/n}/det((1/n)ΣHᵢ)) dμ)`.
pub fn omega(functions: &FunctionVector, spec: &QuadratureSpec) -> Result<OmegaResult> {
    let n = functions.len() as f64;
    let fs: Vec<&LogConcaveFunction> = functions.iter().collect();
    let weights = vec![1.0 / n; fs.len()];
    let frame = frame_for(&fs, &weights)?;
    let d = functions.dim();

    // (e^{-ψ̄}, ψ̄, ⟨x,∇ψ̄⟩, log det Hess ψ̄, (1/n)Σ log det Hᵢ); `None` where the
    // weight underflows, since the averaged Hessian is unreliable there.
    type Parts = (f64, f64, f64, f64, f64);
    let parts = |x: &Vector| -> Result<Option<Parts>> {
        let mut value = 0.0;
        let mut grad = Vector::zeros(d);
        let mut hess = Matrix::zeros(d, d);
        let mut mean_log_det = 0.0;
        for f in &fs {
            let j = f.potential_jet(x)?;
            value += j.value / n;
            grad += &j.gradient / n;
            hess += &j.hessian / n;
            mean_log_det += j.log_det / n;
        }
        let weight = (-value).exp();
        if weight == 0.0 {
            return Ok(None);
        }
        let log_det_mean = linalg::log_det_spd(&hess).map_err(|_| Error::NonConvexPotential)?;
        Ok(Some((weight, value, x.dot(&grad), log_det_mean, mean_log_det)))
    };

    let mass = quadrature::integrate(|x| Ok(parts(x)?.map_or(0.0, |p| p.0)), &frame, spec)?;
    // Both terms enter Ω divided by the mass, so their accuracy is judged
    // relative to it; the Hessian term vanishes identically for n = 1.
    let relative_to_mass = |r: IntegrationResult| -> Result<IntegrationResult> {
        let allowed = spec.target() * r.value.abs().max(mass.value);
        if r.scheme == quadrature::Scheme::GaussHermite && r.error > allowed {
            return Err(Error::diverged(format!(
                "Gauss-Hermite error estimate {:.3e} exceeds {:.3e} relative to the mass",
                r.error, allowed
            )));
        }
        Ok(r)
    };
    let kl = relative_to_mass(quadrature::integrate_best_effort(
        |x| Ok(parts(x)?.map_or(0.0, |(w, v, xg, ld, _)| w * (2.0 * v - xg + ld))),
        &frame,
        spec,
    )?)?;
    let hess = if fs.len() == 1 {
        IntegrationResult::exact(0.0)
    } else {
        relative_to_mass(quadrature::integrate_best_effort(
            |x| Ok(parts(x)?.map_or(0.0, |(w, _, _, ld, mld)| w * (mld - ld))),
            &frame,
            spec,
        )?)?
    };
    let kl_term = kl.value / mass.value;
    let hessian_term = hess.value / mass.value;
    let log_value = kl_term + hessian_term;
    let rel_mass = mass.error / mass.value;
    let error = kl.error / mass.value
        + hess.error / mass.value
        + (kl_term.abs() + hessian_term.abs()) * rel_mass;
    Ok(OmegaResult {
        value: log_value.exp(),
        log_value,
        kl_term,
        hessian_term,
        mass: mass.value,
        error,
        evaluations: mass.evaluations + kl.evaluations + hess.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::GaussianParams;
    use std::f64::consts::PI;

    fn gauss(c: f64, diag: &[f64]) -> LogConcaveFunction {
        let a = Matrix::from_diagonal(&Vector::from_row_slice(diag));
        LogConcaveFunction::gaussian(&GaussianParams::new(c, a).unwrap()).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::gauss_hermite(20)
    }

    #[test]
    fn classical_examples() {
        let g = gauss(1.0, &[1.0, 1.0]);
        assert!(classical(Generator::Log, &g, &spec()).unwrap().value.abs() < 1e-14);
        assert!(classical(Generator::AbsMinusOne, &g, &spec()).unwrap().value.abs() < 1e-14);
        let g = gauss(1.0, &[1.0, 4.0]);
        let v = classical(Generator::power(1.0), &g, &spec()).unwrap().value;
        assert!((v - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn mixed_examples() {
        let fv = FunctionVector::new(vec![gauss(1.0, &[1.0, 1.0]); 2]).unwrap();
        let inst = DivergenceInstance::new(fv, vec![Generator::power(0.4); 2]).unwrap();
        assert!((mixed(&inst, &spec()).unwrap().value - 2.0 * PI).abs() < 1e-10);

        let fv = FunctionVector::new(vec![gauss(1.0, &[1.0, 1.0]), gauss(2.0, &[2.0, 2.0])]).unwrap();
        let inst = DivergenceInstance::new(fv, vec![Generator::power(1.0); 2]).unwrap();
        let expected = 4.0 * PI / 3.0 * 2f64.sqrt();
        assert!((mixed(&inst, &spec()).unwrap().value - expected).abs() < 1e-9);
        assert!((mixed_swapped(&inst, &spec()).unwrap().value - expected).abs() < 1e-9);
    }

    #[test]
    fn kl_examples() {
        let fv = FunctionVector::new(vec![gauss(1.0, &[1.0, 1.0]); 2]).unwrap();
        assert_eq!(mixed_kl(&fv, &spec()).unwrap().value, 0.0);
        let fv = FunctionVector::new(vec![gauss(1.0, &[2.0, 2.0]); 2]).unwrap();
        let v = mixed_kl(&fv, &spec()).unwrap().value;
        assert!((v - 4f64.ln() * PI).abs() < 1e-10);
    }

    #[test]
    fn ith_boundaries() {
        let a = LogConcaveFunction::cosh(1);
        let b = gauss(1.5, &[2.0]);
        let f1 = Generator::power(0.3);
        let f2 = Generator::power(0.6);
        let at0 = ith_mixed(f1, f2, &a, &b, 0.0, 2.0, &spec()).unwrap().value;
        let c2 = classical(f2, &b, &spec()).unwrap().value;
        assert!((at0 - c2).abs() < 1e-10 * c2);
        let at_n = ith_mixed(f1, f2, &a, &b, 2.0, 2.0, &spec()).unwrap().value;
        let c1 = classical(f1, &a, &spec()).unwrap().value;
        assert!((at_n - c1).abs() < 1e-8 * c1);
    }

    #[test]
    fn negative_factor_is_reported() {
        let fv = FunctionVector::new(vec![gauss(1.0, &[0.5]), gauss(1.0, &[0.5])]).unwrap();
        let inst = DivergenceInstance::new(fv, vec![Generator::Log; 2]).unwrap();
        assert!(matches!(mixed(&inst, &spec()), Err(Error::NegativeFactor { .. })));
    }

    #[test]
    fn omega_gaussian() {
        let fv = FunctionVector::new(vec![gauss(1.0, &[1.0, 4.0]); 2]).unwrap();
        let o = omega(&fv, &spec()).unwrap();
        assert!((o.value - 4.0).abs() < 1e-10);
        assert!(o.hessian_term.abs() < 1e-14);
    }
}
