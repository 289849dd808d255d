//! Numeric Legendre–Fenchel transform and dual functions `φ° = e^{-ψ*}`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{LogConcaveFunction, Shape};
use crate::linalg::{self, Matrix, Vector};

const MAX_ITERATIONS: usize = 100;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const ROUNDING: f64 = 64.0 * f64::EPSILON;

/// Outcome of `sup_x ⟨x,y⟩ − ψ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateResult {
    /// `ψ*(y)`.
    pub value: f64,
    /// `x*` with `∇ψ(x*) = y`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
    /// `|∇ψ(x*) − y|`.
    pub residual: f64,
}

/// Solver output for a shape potential, including `Hess ψ₀(x*)`.
pub(crate) struct ShapeSolution {
    pub value: f64,
    pub maximizer: Vector,
    pub primal_hessian: Matrix,
    pub iterations: usize,
    pub residual: f64,
}

fn residual_tolerance(y: &Vector) -> f64 {
    1e-10 * (1.0 + y.norm())
}

/// Newton ascent on `x ↦ ⟨x,y⟩ − ψ₀(x)` with Armijo backtracking.
pub(crate) fn solve(shape: &Arc<Shape>, y: &Vector, start: Option<Vector>) -> Result<ShapeSolution> {
    let d = y.len();
    let mut x = match (start, &**shape) {
        (Some(s), _) => s,
        (None, Shape::Gaussian { a }) => linalg::cholesky(a)?.solve(y),
        (None, _) => Vector::zeros(d),
    };
    let tol = residual_tolerance(y);
    let mut jet = shape.jet(&x)?;
    let mut objective = x.dot(y) - jet.value;
    for iteration in 0..=MAX_ITERATIONS {
        let grad = y - &jet.gradient;
        let residual = grad.norm();
        if residual <= tol {
            return Ok(ShapeSolution {
                value: x.dot(y) - jet.value,
                maximizer: x,
                primal_hessian: jet.hessian,
                iterations: iteration,
                residual,
            });
        }
        if iteration == MAX_ITERATIONS {
            return Err(Error::OptimizationFailed {
                iterations: iteration,
                residual,
            });
        }
        let chol = linalg::cholesky(&jet.hessian).map_err(|_| Error::NonConvexPotential)?;
        let step = chol.solve(&grad);
        let slope = grad.dot(&step);
        // Once the predicted gain is below the rounding level of the objective,
        // value comparisons are noise: take the full Newton step.
        let newton_regime = slope <= ROUNDING * (1.0 + objective.abs());
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = &x + &step * alpha;
            if let Ok(tj) = shape.jet(&trial) {
                let tv = trial.dot(y) - tj.value;
                if tv.is_finite() && (newton_regime || tv >= objective + ARMIJO * alpha * slope) {
                    x = trial;
                    jet = tj;
                    objective = tv;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // The full Newton step is below rounding resolution; accept the
            // current point only if it already satisfies a slightly relaxed residual.
            if residual <= 1e3 * tol {
                return Ok(ShapeSolution {
                    value: x.dot(y) - jet.value,
                    maximizer: x,
                    primal_hessian: jet.hessian,
                    iterations: iteration,
                    residual,
                });
            }
            return Err(Error::OptimizationFailed {
                iterations: iteration,
                residual,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// `ψ*(y)` for the full potential `ψ = ψ₀ − log c`, so `ψ*(y) = ψ₀*(y) + log c`.
pub fn legendre(f: &LogConcaveFunction, y: &Vector) -> Result<ConjugateResult> {
    if y.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: y.len(),
        });
    }
    let sol = solve(f.shape(), y, None)?;
    Ok(ConjugateResult {
        value: sol.value + f.log_scale(),
        maximizer: sol.maximizer.iter().copied().collect(),
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

/// `φ°`: closed form `(1/c, A⁻¹)` for Gaussians, numeric conjugation otherwise.
pub fn dual_function(f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
    let d = f.dim();
    match &**f.shape() {
        Shape::Gaussian { a } => Ok(LogConcaveFunction::from_shape(
            d,
            -f.log_scale(),
            Shape::Gaussian {
                a: linalg::inverse_spd(a)?,
            },
        )),
        Shape::Dual { primal } => Ok(LogConcaveFunction::with_shape(d, -f.log_scale(), Arc::clone(primal))),
        _ => Ok(numeric_dual_function(f)),
    }
}

/// Dual built by numeric conjugation even when a closed form exists.
pub fn numeric_dual_function(f: &LogConcaveFunction) -> LogConcaveFunction {
    LogConcaveFunction::from_shape(
        f.dim(),
        -f.log_scale(),
        Shape::Dual {
            primal: Arc::clone(f.shape()),
        },
    )
}

/// Largest residuals of the three duality identities over a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityResiduals {
    /// `|∇ψ(∇ψ*(y)) − y|`, relative to `1 + |y|`.
    pub gradient: f64,
    /// `‖Hess ψ(∇ψ*(y))·Hess ψ*(y) − I‖`.
    pub hessian: f64,
    /// `|ψ(∇ψ*(y)) − (⟨y,∇ψ*(y)⟩ − ψ*(y))|`, relative to `1 + |⟨y,∇ψ*(y)⟩|`.
    pub value: f64,
    pub points: usize,
}

impl DualityResiduals {
    pub fn max(&self) -> f64 {
        self.gradient.max(self.hessian).max(self.value)
    }
}

/// Evaluates the duality identities at each `y` using the numerically built dual.
pub fn check_duality_identities(f: &LogConcaveFunction, points: &[Vector]) -> Result<DualityResiduals> {
    let dual = dual_function(f)?;
    let mut out = DualityResiduals {
        gradient: 0.0,
        hessian: 0.0,
        value: 0.0,
        points: points.len(),
    };
    let d = f.dim();
    for y in points {
        let dj = dual.potential_jet(y)?;
        let x = &dj.gradient;
        let pj = f.potential_jet(x)?;
        out.gradient = out
            .gradient
            .max((&pj.gradient - y).norm() / (1.0 + y.norm()));
        let prod = &pj.hessian * &dj.hessian;
        out.hessian = out.hessian.max((prod - Matrix::identity(d, d)).amax());
        let pairing = y.dot(x);
        out.value = out
            .value
            .max((pj.value - (pairing - dj.value)).abs() / (1.0 + pairing.abs()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::GaussianParams;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn gaussian_by_hand() {
        let a = Matrix::from_diagonal(&v(&[2.0, 0.5]));
        let g = LogConcaveFunction::gaussian(&GaussianParams::new(1.0, a).unwrap()).unwrap();
        let r = legendre(&g, &v(&[1.0, 1.0])).unwrap();
        assert!((r.value - 1.25).abs() < 1e-12);
        assert!((r.maximizer[0] - 0.5).abs() < 1e-12 && (r.maximizer[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cosh_at_one() {
        let r = legendre(&LogConcaveFunction::cosh(1), &v(&[1.0])).unwrap();
        let expected = 1f64.asinh() - 2f64.sqrt() + 1.0;
        assert!((r.value - expected).abs() < 1e-12);
        assert!((r.maximizer[0] - 1f64.asinh()).abs() < 1e-10);
        assert!((r.value - 0.467160).abs() < 1e-6);
    }

    #[test]
    fn far_point_needs_backtracking() {
        let r = legendre(&LogConcaveFunction::cosh(1), &v(&[1000.0])).unwrap();
        let y: f64 = 1000.0;
        let expected = y * y.asinh() - (1.0 + y * y).sqrt() + 1.0;
        assert!((r.value - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn gaussian_dual_is_closed_form() {
        let a = Matrix::from_diagonal(&v(&[2.0, 0.5]));
        let g = LogConcaveFunction::gaussian(&GaussianParams::new(2.0, a).unwrap()).unwrap();
        let p = dual_function(&g).unwrap().gaussian_params().unwrap();
        assert!((p.c - 0.5).abs() < 1e-15);
        assert!((p.a - Matrix::from_diagonal(&v(&[0.5, 2.0]))).amax() < 1e-15);
    }

    #[test]
    fn dual_scale_is_reciprocal() {
        let f = LogConcaveFunction::cosh(1);
        let f2 = f.scaled(2.0).unwrap();
        let d1 = dual_function(&f).unwrap();
        let d2 = dual_function(&f2).unwrap();
        for y in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let y = v(&[y]);
            let r = d2.value(&y).unwrap() / (d1.value(&y).unwrap() / 2.0);
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identities_on_quartic() {
        let f = LogConcaveFunction::quartic(2);
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, -2.0]), v(&[5.0, 0.1])];
        let r = check_duality_identities(&f, &pts).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }
}
