//! Log-concave functions `φ = c·e^{-ψ₀}` represented through their potentials.
//!
//! The shape potential `ψ₀` is normalized so that its minimum is `≥ 0`; the
//! multiplicative constant is stored separately as `log c`. The full potential
//! is `ψ = ψ₀ − log c`, so `φ = e^{-ψ}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conjugate;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::quadrature::{self, IntegrationResult, LaplaceFrame, QuadratureSpec};

/// Potential with analytic first and second derivatives, supplied by the caller.
///
/// Finite differences are only ever used to validate these callbacks.
pub trait CustomPotential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn hessian(&self, x: &Vector) -> Matrix;
    fn name(&self) -> String {
        "custom".to_string()
    }
}

/// Family tag of a [`LogConcaveFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    Cosh,
    Quartic,
    ComposedLinear,
    Dual,
    Custom,
}

/// Value, gradient and Hessian of the shape potential.
#[derive(Debug, Clone)]
pub(crate) struct ShapeJet {
    pub value: f64,
    pub gradient: Vector,
    pub hessian: Matrix,
    /// `log det` of the Hessian when known in closed form; far in the tails
    /// the assembled Hessian can lose definiteness to rounding.
    pub log_det: Option<f64>,
}

/// `log cosh t` without overflow.
fn log_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Clone)]
pub(crate) enum Shape {
    Gaussian { a: Matrix },
    /// `Σⱼ cosh(xⱼ) − d`
    Cosh,
    /// `|x|²/2 + |x|⁴/4`
    Quartic,
    /// `ψ₀(M x)`
    Composed { inner: Arc<Shape>, m: Matrix },
    /// Legendre transform of the primal shape potential.
    Dual { primal: Arc<Shape> },
    Custom(Arc<dyn CustomPotential>),
}

impl Shape {
    pub(crate) fn jet(&self, x: &Vector) -> Result<ShapeJet> {
        let d = x.len();
        match self {
            Shape::Gaussian { a } => {
                let ax = a * x;
                Ok(ShapeJet {
                    value: 0.5 * x.dot(&ax),
                    gradient: ax,
                    hessian: a.clone(),
                    log_det: None,
                })
            }
            Shape::Cosh => {
                let value = x.iter().map(|v| v.cosh() - 1.0).sum();
                Ok(ShapeJet {
                    value,
                    gradient: x.map(f64::sinh),
                    hessian: Matrix::from_diagonal(&x.map(f64::cosh)),
                    log_det: Some(x.iter().map(|&t| log_cosh(t)).sum()),
                })
            }
            Shape::Quartic => {
                let r2 = x.norm_squared();
                let mut hessian = x * x.transpose() * 2.0;
                for i in 0..d {
                    hessian[(i, i)] += 1.0 + r2;
                }
                Ok(ShapeJet {
                    value: 0.5 * r2 + 0.25 * r2 * r2,
                    gradient: x * (1.0 + r2),
                    hessian,
                    log_det: Some((d as f64 - 1.0) * r2.ln_1p() + (3.0 * r2).ln_1p()),
                })
            }
            Shape::Composed { inner, m } => {
                let mx = m * x;
                let j = inner.jet(&mx)?;
                let mt = m.transpose();
                Ok(ShapeJet {
                    value: j.value,
                    gradient: &mt * j.gradient,
                    hessian: linalg::symmetrize(&(&mt * j.hessian * m)),
                    log_det: j.log_det.map(|l| l + 2.0 * linalg::det_general(m).abs().ln()),
                })
            }
            Shape::Dual { primal } => {
                let sol = conjugate::solve(primal, x, None)?;
                let hessian = linalg::inverse_spd(&sol.primal_hessian)
                    .map_err(|_| Error::NonConvexPotential)?;
                Ok(ShapeJet {
                    value: sol.value,
                    gradient: sol.maximizer,
                    hessian,
                    log_det: None,
                })
            }
            Shape::Custom(p) => Ok(ShapeJet {
                value: p.value(x),
                gradient: p.gradient(x),
                hessian: p.hessian(x),
                log_det: None,
            }),
        }
    }

    pub(crate) fn family(&self) -> Family {
        match self {
            Shape::Gaussian { .. } => Family::Gaussian,
            Shape::Cosh => Family::Cosh,
            Shape::Quartic => Family::Quartic,
            Shape::Composed { .. } => Family::ComposedLinear,
            Shape::Dual { .. } => Family::Dual,
            Shape::Custom(_) => Family::Custom,
        }
    }

    /// Structural equality; custom potentials compare by identity.
    pub(crate) fn same_as(&self, other: &Shape) -> bool {
        match (self, other) {
            (Shape::Gaussian { a }, Shape::Gaussian { a: b }) => a == b,
            (Shape::Cosh, Shape::Cosh) | (Shape::Quartic, Shape::Quartic) => true,
            (Shape::Composed { inner, m }, Shape::Composed { inner: i2, m: m2 }) => {
                m == m2 && inner.same_as(i2)
            }
            (Shape::Dual { primal }, Shape::Dual { primal: p2 }) => primal.same_as(p2),
            (Shape::Custom(a), Shape::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    fn describe(&self) -> String {
        match self {
            Shape::Gaussian { a } => format!("gaussian(A={:?})", linalg::to_rows(a)),
            Shape::Cosh => "cosh".to_string(),
            Shape::Quartic => "quartic".to_string(),
            Shape::Composed { inner, m } => {
                format!("{}∘T(T={:?})", inner.describe(), linalg::to_rows(m))
            }
            Shape::Dual { primal } => format!("dual({})", primal.describe()),
            Shape::Custom(p) => p.name(),
        }
    }
}

/// Full jet of the potential `ψ = −log φ` at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vector,
    pub hessian: Matrix,
    /// `log det Hess ψ`, from a Cholesky factorization.
    pub log_det: f64,
}

impl Jet {
    /// `log(p/q) = 2ψ − ⟨x, ∇ψ⟩ + log det Hess ψ`.
    pub fn log_ratio(&self, x: &Vector) -> f64 {
        2.0 * self.value - x.dot(&self.gradient) + self.log_det
    }
}

/// The density pair `(p_φ, q_φ)` at a point, with their logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPair {
    pub p: f64,
    pub q: f64,
    pub log_p: f64,
    pub log_q: f64,
}

impl DensityPair {
    pub fn ratio(&self) -> f64 {
        (self.log_p - self.log_q).exp()
    }
}

/// Scale and matrix of a Gaussian `c·e^{-⟨Ax,x⟩/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub c: f64,
    #[serde(rename = "A", with = "matrix_rows")]
    pub a: Matrix,
}

impl GaussianParams {
    pub fn new(c: f64, a: Matrix) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale c must be positive, got {c}")));
        }
        linalg::check_spd(&a)?;
        Ok(GaussianParams { c, a })
    }

    pub fn standard(d: usize) -> Self {
        GaussianParams {
            c: 1.0,
            a: Matrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

pub(crate) mod matrix_rows {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::{self, Matrix};

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        linalg::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        linalg::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// A log-concave function `φ = e^{-ψ}` on `R^d`.
///
/// Cloning is cheap; the shape is shared.
#[derive(Clone)]
pub struct LogConcaveFunction {
    dim: usize,
    log_scale: f64,
    shape: Arc<Shape>,
}

impl fmt::Debug for LogConcaveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl LogConcaveFunction {
    pub fn gaussian(params: &GaussianParams) -> Result<Self> {
        linalg::check_spd(&params.a)?;
        if params.c.is_nan() || params.c <= 0.0 {
            return Err(Error::InvalidArgument("scale c must be positive".into()));
        }
        Ok(LogConcaveFunction {
            dim: params.dim(),
            log_scale: params.c.ln(),
            shape: Arc::new(Shape::Gaussian {
                a: params.a.clone(),
            }),
        })
    }

    pub fn standard_gaussian(d: usize) -> Self {
        Self::gaussian(&GaussianParams::standard(d)).expect("identity is SPD")
    }

    /// Separable `ψ(x) = Σⱼ cosh(xⱼ) − d`.
    pub fn cosh(d: usize) -> Self {
        Self::from_shape(d, 0.0, Shape::Cosh)
    }

    /// `ψ(x) = |x|²/2 + |x|⁴/4`.
    pub fn quartic(d: usize) -> Self {
        Self::from_shape(d, 0.0, Shape::Quartic)
    }

    pub fn custom(potential: Arc<dyn CustomPotential>) -> Self {
        let d = potential.dim();
        Self::from_shape(d, 0.0, Shape::Custom(potential))
    }

    pub(crate) fn from_shape(dim: usize, log_scale: f64, shape: Shape) -> Self {
        LogConcaveFunction {
            dim,
            log_scale,
            shape: Arc::new(shape),
        }
    }

    pub(crate) fn with_shape(dim: usize, log_scale: f64, shape: Arc<Shape>) -> Self {
        LogConcaveFunction {
            dim,
            log_scale,
            shape,
        }
    }

    pub(crate) fn shape(&self) -> &Arc<Shape> {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    pub fn family(&self) -> Family {
        self.shape.family()
    }

    pub fn has_closed_form_dual(&self) -> bool {
        matches!(*self.shape, Shape::Gaussian { .. })
    }

    pub fn gaussian_params(&self) -> Option<GaussianParams> {
        match &*self.shape {
            Shape::Gaussian { a } => Some(GaussianParams {
                c: self.scale(),
                a: a.clone(),
            }),
            _ => None,
        }
    }

    /// `λ·φ` for `λ > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {factor}")));
        }
        Ok(LogConcaveFunction {
            dim: self.dim,
            log_scale: self.log_scale + factor.ln(),
            shape: Arc::clone(&self.shape),
        })
    }

    /// Same function with a different multiplicative constant.
    pub fn with_log_scale(&self, log_scale: f64) -> Self {
        LogConcaveFunction {
            dim: self.dim,
            log_scale,
            shape: Arc::clone(&self.shape),
        }
    }

    /// True when `self` and `other` differ only by a positive constant factor.
    pub fn proportional_to(&self, other: &LogConcaveFunction) -> bool {
        self.dim == other.dim
            && (Arc::ptr_eq(&self.shape, &other.shape) || self.shape.same_as(&other.shape))
    }

    pub fn describe(&self) -> String {
        format!("{} c={} d={}", self.shape.describe(), self.scale(), self.dim)
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `(ψ(x), ∇ψ(x), Hess ψ(x))` plus `log det Hess ψ(x)`.
    pub fn potential_jet(&self, x: &Vector) -> Result<Jet> {
        self.check_dim(x)?;
        let sj = self.shape.jet(x)?;
        let log_det = match sj.log_det {
            Some(l) if l.is_finite() => l,
            _ => {
                let chol = linalg::cholesky(&sj.hessian).map_err(|_| Error::NonConvexPotential)?;
                linalg::log_det_from_cholesky(&chol)
            }
        };
        Ok(Jet {
            value: sj.value - self.log_scale,
            gradient: sj.gradient,
            hessian: sj.hessian,
            log_det,
        })
    }

    pub fn potential(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.shape.jet(x)?.value - self.log_scale)
    }

    /// `φ(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok((-self.potential(x)?).exp())
    }

    /// `q = e^{-ψ}` and `p = e^{ψ − ⟨x,∇ψ⟩}·det Hess ψ`.
    pub fn density_pair(&self, x: &Vector) -> Result<DensityPair> {
        let jet = self.potential_jet(x)?;
        let log_q = -jet.value;
        let log_p = jet.value - x.dot(&jet.gradient) + jet.log_det;
        Ok(DensityPair {
            p: log_p.exp(),
            q: log_q.exp(),
            log_p,
            log_q,
        })
    }

    /// `φ∘T` for a symmetric `T` with `det T = 1`.
    pub fn apply_selfadjoint(&self, t: &Matrix) -> Result<Self> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.nrows(),
            });
        }
        if !linalg::is_symmetric(t, linalg::SYMMETRY_TOL) {
            return Err(Error::NotSelfAdjoint);
        }
        let det = linalg::det_general(t);
        if (det - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnimodular { det });
        }
        self.compose_linear(t)
    }

    /// `x ↦ φ(T x)` for an invertible `T`; Gaussians stay Gaussian (`TᵀAT`).
    pub fn compose_linear(&self, t: &Matrix) -> Result<Self> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.nrows(),
            });
        }
        let det = linalg::det_general(t);
        if det.is_nan() || det.abs() <= 1e-300 || !det.is_finite() {
            return Err(Error::InvalidArgument(format!("linear map must be invertible (det = {det})")));
        }
        let shape = match &*self.shape {
            Shape::Gaussian { a } => Shape::Gaussian {
                a: linalg::symmetrize(&(t.transpose() * a * t)),
            },
            Shape::Composed { inner, m } => Shape::Composed {
                inner: Arc::clone(inner),
                m: m * t,
            },
            _ => Shape::Composed {
                inner: Arc::clone(&self.shape),
                m: t.clone(),
            },
        };
        Ok(Self::from_shape(self.dim, self.log_scale, shape))
    }
}

/// Ordered, non-empty list of log-concave functions sharing one dimension.
#[derive(Debug, Clone)]
pub struct FunctionVector {
    functions: Vec<LogConcaveFunction>,
}

impl FunctionVector {
    pub fn new(functions: Vec<LogConcaveFunction>) -> Result<Self> {
        let first = functions
            .first()
            .ok_or_else(|| Error::InvalidArgument("function vector must be non-empty".into()))?;
        let d = first.dim();
        if let Some(f) = functions.iter().find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
        Ok(FunctionVector { functions })
    }

    /// `n` copies of one function.
    pub fn repeated(f: &LogConcaveFunction, n: usize) -> Result<Self> {
        Self::new(vec![f.clone(); n])
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.functions[0].dim()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LogConcaveFunction> {
        self.functions.iter()
    }

    pub fn get(&self, i: usize) -> Option<&LogConcaveFunction> {
        self.functions.get(i)
    }

    pub fn as_slice(&self) -> &[LogConcaveFunction] {
        &self.functions
    }

    /// Every entry is a positive multiple of the first one.
    pub fn is_proportional(&self) -> bool {
        let first = &self.functions[0];
        self.functions.iter().all(|f| f.proportional_to(first))
    }

    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&LogConcaveFunction) -> Result<LogConcaveFunction>,
    {
        Self::new(self.functions.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    pub fn apply_selfadjoint(&self, t: &Matrix) -> Result<Self> {
        self.map(|f| f.apply_selfadjoint(t))
    }
}

impl std::ops::Index<usize> for FunctionVector {
    type Output = LogConcaveFunction;

    fn index(&self, i: usize) -> &LogConcaveFunction {
        &self.functions[i]
    }
}

/// Weighted mean potential `Σ wᵢ ψᵢ`, the reference for Laplace frames.
pub(crate) fn mean_potential_jet(
    functions: &[&LogConcaveFunction],
    weights: &[f64],
    x: &Vector,
) -> Result<(f64, Vector, Matrix)> {
    let d = x.len();
    let mut value = 0.0;
    let mut grad = Vector::zeros(d);
    let mut hess = Matrix::zeros(d, d);
    for (f, &w) in functions.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        f.check_dim(x)?;
        let j = f.shape.jet(x)?;
        value += w * (j.value - f.log_scale);
        grad += &j.gradient * w;
        hess += &j.hessian * w;
    }
    Ok((value, grad, hess))
}

/// Laplace frame of `Σ wᵢ ψᵢ`.
pub(crate) fn weighted_frame(
    functions: &[&LogConcaveFunction],
    weights: &[f64],
) -> Result<LaplaceFrame> {
    let d = functions[0].dim();
    quadrature::laplace_fit(d, |x| mean_potential_jet(functions, weights, x))
}

/// Normalized first moment of `φ` with quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct Barycenter {
    pub point: Vector,
    pub mass: IntegrationResult,
    /// Largest absolute quadrature error among the coordinate integrals, divided by the mass.
    pub error: f64,
}

/// `∫ x φ dx / ∫ φ dx`.
pub fn barycenter(f: &LogConcaveFunction, spec: &QuadratureSpec) -> Result<Barycenter> {
    let frame = weighted_frame(&[f], &[1.0])?;
    let mass = quadrature::integrate(|x| f.value(x), &frame, spec)?;
    if mass.value.is_nan() || mass.value <= 0.0 {
        return Err(Error::diverged("non-positive mass"));
    }
    let d = f.dim();
    let mut point = Vector::zeros(d);
    let mut error: f64 = 0.0;
    for j in 0..d {
        let m = quadrature::integrate(|x| Ok(x[j] * f.value(x)?), &frame, spec)?;
        point[j] = m.value / mass.value;
        error = error.max(m.error / mass.value);
    }
    Ok(Barycenter { point, mass, error })
}

/// Largest relative deviations of the analytic derivatives from central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub gradient: f64,
    pub hessian: f64,
}

/// Compares analytic gradient/Hessian with central finite differences of `ψ`
/// (gradient) and of `∇ψ` (Hessian), step `ε^{1/3}·(1+|x|)`.
pub fn validate_derivatives(f: &LogConcaveFunction, points: &[Vector]) -> Result<DerivativeCheck> {
    let mut worst = DerivativeCheck {
        gradient: 0.0,
        hessian: 0.0,
    };
    for x in points {
        let jet = f.potential_jet(x)?;
        let h = f64::EPSILON.cbrt() * (1.0 + x.norm());
        let d = f.dim();
        let gscale = 1.0 + jet.gradient.amax();
        let hscale = 1.0 + jet.hessian.amax();
        for i in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.potential(&xp)? - f.potential(&xm)?) / (2.0 * h);
            worst.gradient = worst.gradient.max((fd - jet.gradient[i]).abs() / gscale);
            let gp = f.potential_jet(&xp)?.gradient;
            let gm = f.potential_jet(&xm)?.gradient;
            for k in 0..d {
                let fd = (gp[k] - gm[k]) / (2.0 * h);
                worst.hessian = worst.hessian.max((fd - jet.hessian[(k, i)]).abs() / hscale);
            }
        }
    }
    Ok(worst)
}
