//! Gaussian reference frames fitted at the minimum of a convex potential.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

const MAX_ITERATIONS: usize = 100;
const GRADIENT_TOL: f64 = 1e-10;
/// Accepted gradient norm when the line search stalls at rounding level.
const STALL_TOL: f64 = 1e-8;
const ROUNDING: f64 = 64.0 * f64::EPSILON;

/// Mode `m` and covariance `Σ`; nodes are placed at `x = m + L u` with `Σ = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceFrame {
    mode: Vector,
    covariance: Matrix,
    factor: Matrix,
    log_det_factor: f64,
}

impl LaplaceFrame {
    pub fn new(mode: Vector, covariance: Matrix) -> Result<Self> {
        if mode.len() != covariance.nrows() {
            return Err(Error::DimensionMismatch {
                expected: covariance.nrows(),
                got: mode.len(),
            });
        }
        linalg::check_spd(&covariance)?;
        let factor = linalg::cholesky_factor(&covariance)?;
        let log_det_factor = factor.diagonal().iter().map(|v| v.ln()).sum();
        Ok(LaplaceFrame {
            mode,
            covariance,
            factor,
            log_det_factor,
        })
    }

    /// Frame `(0, I)`.
    pub fn standard(d: usize) -> Self {
        Self::new(Vector::zeros(d), Matrix::identity(d, d)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.mode.len()
    }

    pub fn mode(&self) -> &Vector {
        &self.mode
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// `log det L = ½ log det Σ`.
    pub fn log_det_factor(&self) -> f64 {
        self.log_det_factor
    }

    /// `m + L u`.
    pub fn map(&self, u: &Vector) -> Vector {
        &self.mode + &self.factor * u
    }

    /// Same mode with covariance multiplied by `s²`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.mode.clone(), &self.covariance * (s * s))
    }
}

/// Newton minimization of a strictly convex potential from the origin;
/// the covariance is the inverse Hessian at the mode.
pub fn laplace_fit<F>(d: usize, potential: F) -> Result<LaplaceFrame>
where
    F: Fn(&Vector) -> Result<(f64, Vector, Matrix)>,
{
    let mut x = Vector::zeros(d);
    let (mut value, mut grad, mut hess) = potential(&x)?;
    for iteration in 0..=MAX_ITERATIONS {
        let gnorm = grad.norm();
        if gnorm <= GRADIENT_TOL {
            return finish(x, &hess);
        }
        if iteration == MAX_ITERATIONS {
            return Err(Error::OptimizationFailed {
                iterations: iteration,
                residual: gnorm,
            });
        }
        let chol = linalg::cholesky(&hess).map_err(|_| Error::NonConvexPotential)?;
        let step = -chol.solve(&grad);
        let slope = grad.dot(&step);
        // Predicted decrease below rounding resolution: value tests are noise.
        let newton_regime = -slope <= ROUNDING * (1.0 + value.abs());
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &x + &step * alpha;
            if let Ok((tv, tg, th)) = potential(&trial) {
                if tv.is_finite() && (newton_regime || tv <= value + 1e-4 * alpha * slope) {
                    x = trial;
                    value = tv;
                    grad = tg;
                    hess = th;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            if gnorm <= STALL_TOL {
                return finish(x, &hess);
            }
            return Err(Error::OptimizationFailed {
                iterations: iteration,
                residual: gnorm,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn finish(mode: Vector, hess: &Matrix) -> Result<LaplaceFrame> {
    let cov = linalg::inverse_spd(hess).map_err(|_| Error::NonConvexPotential)?;
    LaplaceFrame::new(mode, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_fit() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let f = laplace_fit(2, |x| Ok((0.5 * x.dot(&(&a * x)), &a * x, a.clone()))).unwrap();
        assert_eq!(f.mode(), &Vector::zeros(2));
        let inv = linalg::inverse_spd(&a).unwrap();
        assert!((f.covariance() - inv).amax() < 1e-14);
    }

    #[test]
    fn shifted_quadratic() {
        let v = Vector::from_row_slice(&[1.5, -2.0]);
        let f = laplace_fit(2, |x| {
            let r = x - &v;
            Ok((0.5 * r.norm_squared(), r, Matrix::identity(2, 2)))
        })
        .unwrap();
        assert!((f.mode() - &v).norm() < 1e-12);
        assert!((f.covariance() - Matrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn cosh_plus_quadratic_mean() {
        let f = laplace_fit(1, |x| {
            let t = x[0];
            Ok((
                0.5 * (t.cosh() - 1.0) + 0.25 * t * t,
                Vector::from_element(1, 0.5 * t.sinh() + 0.5 * t),
                Matrix::from_element(1, 1, 0.5 * t.cosh() + 0.5),
            ))
        })
        .unwrap();
        assert_eq!(f.mode()[0], 0.0);
        assert!((f.covariance()[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_convex_fails() {
        let err = laplace_fit(1, |x| {
            Ok((-(x[0] - 1.0).powi(2), Vector::from_element(1, -2.0 * (x[0] - 1.0)), Matrix::from_element(1, 1, -2.0)))
        });
        assert_eq!(err.unwrap_err(), Error::NonConvexPotential);
    }
}
