//! Integration of smooth, Gaussian-decay integrands over `R^d` and
//! maximization of smooth objectives, both in a Laplace reference frame.

mod gauss_hermite;
mod laplace;
mod maximize;
mod monte_carlo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

pub use gauss_hermite::{max_order, rule, Rule, MAX_DIM as GH_MAX_DIM, MAX_NODES, MAX_ORDER};
pub use laplace::{laplace_fit, LaplaceFrame};
pub use maximize::{maximize, Maximum};
pub use monte_carlo::{MAX_SAMPLES, MIN_SAMPLES};

/// Quadrature scheme tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    GaussHermite,
    MonteCarlo,
}

/// Default relative error target for Gauss–Hermite.
pub const GH_TARGET: f64 = 1e-8;
/// Default relative error target for Monte Carlo.
pub const MC_TARGET: f64 = 1e-3;
/// Default Monte Carlo sample count.
pub const MC_DEFAULT_SAMPLES: usize = 2_000_000;

/// How to integrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum QuadratureSpec {
    GaussHermite {
        order: usize,
        #[serde(default = "gh_target")]
        target: f64,
    },
    MonteCarlo {
        samples: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "mc_target")]
        target: f64,
    },
}

fn gh_target() -> f64 {
    GH_TARGET
}

fn mc_target() -> f64 {
    MC_TARGET
}

impl QuadratureSpec {
    pub fn gauss_hermite(order: usize) -> Self {
        QuadratureSpec::GaussHermite {
            order,
            target: GH_TARGET,
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        QuadratureSpec::MonteCarlo {
            samples,
            seed,
            target: MC_TARGET,
        }
    }

    /// Order 40 for `d ≤ 2`, 24 for `d = 3`, 16 for `d = 4`, Monte Carlo beyond.
    pub fn default_for(d: usize) -> Self {
        match d {
            0..=2 => Self::gauss_hermite(40),
            3 => Self::gauss_hermite(24),
            4 => Self::gauss_hermite(16),
            _ => Self::monte_carlo(MC_DEFAULT_SAMPLES, 0),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            QuadratureSpec::GaussHermite { .. } => Scheme::GaussHermite,
            QuadratureSpec::MonteCarlo { .. } => Scheme::MonteCarlo,
        }
    }

    pub fn target(&self) -> f64 {
        match *self {
            QuadratureSpec::GaussHermite { target, .. } | QuadratureSpec::MonteCarlo { target, .. } => target,
        }
    }

    pub fn with_target(&self, target: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            QuadratureSpec::GaussHermite { target: t, .. } | QuadratureSpec::MonteCarlo { target: t, .. } => {
                *t = target
            }
        }
        s
    }

    /// Loosens (never tightens) the target.
    pub fn at_least(&self, target: f64) -> Self {
        self.with_target(self.target().max(target))
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            QuadratureSpec::GaussHermite { order, target } => {
                if d > GH_MAX_DIM {
                    return Err(Error::InvalidArgument(format!(
                        "Gauss-Hermite supports d ≤ {GH_MAX_DIM}, got {d}"
                    )));
                }
                let cap = max_order(d);
                if order < 2 || order > cap {
                    return Err(Error::InvalidArgument(format!(
                        "Gauss-Hermite order must be in 2..={cap} for d = {d}"
                    )));
                }
                check_target(target)
            }
            QuadratureSpec::MonteCarlo { samples, target, .. } => {
                if samples < MIN_SAMPLES {
                    return Err(Error::InvalidArgument(format!(
                        "Monte Carlo needs at least {MIN_SAMPLES} samples"
                    )));
                }
                check_target(target)
            }
        }
    }
}

fn check_target(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("target error must be positive, got {t}")))
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    /// GH: `|v(order) − v(order/2)|`; MC: three standard errors.
    pub error: f64,
    pub evaluations: usize,
    pub scheme: Scheme,
}

impl IntegrationResult {
    /// Exact value with zero error (closed forms).
    pub fn exact(value: f64) -> Self {
        IntegrationResult {
            value,
            error: 0.0,
            evaluations: 0,
            scheme: Scheme::GaussHermite,
        }
    }
}

/// `∫ g(x) dx` in the given frame.
pub fn integrate<G>(g: G, frame: &LaplaceFrame, spec: &QuadratureSpec) -> Result<IntegrationResult>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    spec.validate(frame.dim())?;
    match *spec {
        QuadratureSpec::GaussHermite { order, target } => gauss_hermite::integrate(&g, frame, order, target, true),
        QuadratureSpec::MonteCarlo { samples, seed, target } => {
            monte_carlo::integrate(&g, frame, samples, seed, target)
        }
    }
}

/// Like [`integrate`], but a Gauss–Hermite run that misses the target at the
/// order cap returns its best estimate (with that error) instead of failing.
/// Meant for integrands with kinks, whose convergence is only algebraic.
pub fn integrate_best_effort<G>(g: G, frame: &LaplaceFrame, spec: &QuadratureSpec) -> Result<IntegrationResult>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    spec.validate(frame.dim())?;
    match *spec {
        QuadratureSpec::GaussHermite { order, target } => gauss_hermite::integrate(&g, frame, order, target, false),
        QuadratureSpec::MonteCarlo { .. } => integrate(g, frame, spec),
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_normalization() {
        let r = integrate(
            |x: &Vector| Ok((-0.5 * x.norm_squared()).exp()),
            &LaplaceFrame::standard(2),
            &QuadratureSpec::gauss_hermite(20),
        )
        .unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn second_moment() {
        let r = integrate(
            |x: &Vector| Ok(x[0] * x[0] * (-0.5 * x[0] * x[0]).exp()),
            &LaplaceFrame::standard(1),
            &QuadratureSpec::gauss_hermite(10),
        )
        .unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kernel_of_mixed_gaussian() {
        let frame = LaplaceFrame::new(Vector::zeros(2), Matrix::identity(2, 2) * (2.0 / 3.0)).unwrap();
        let r = integrate(
            |x: &Vector| Ok((-0.75 * x.norm_squared()).exp()),
            &frame,
            &QuadratureSpec::gauss_hermite(20),
        )
        .unwrap();
        assert!((r.value - 4.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let spec = QuadratureSpec::monte_carlo(20_000, 7).with_target(0.05);
        let g = |x: &Vector| Ok((-0.5 * x.norm_squared()).exp() * (1.0 + x[0] * x[0]));
        let frame = LaplaceFrame::standard(2).scaled(1.2).unwrap();
        let a = integrate(g, &frame, &spec).unwrap();
        let b = integrate(g, &frame, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!((a.value - 4.0 * PI).abs() <= a.error * 2.0);
    }

    #[test]
    fn escalation_reports_divergence() {
        // A kinked integrand converges too slowly for a 1e-15 target.
        let spec = QuadratureSpec::gauss_hermite(40).with_target(1e-15);
        let r = integrate(
            |x: &Vector| Ok(x[0].abs() * (-0.5 * x[0] * x[0]).exp()),
            &LaplaceFrame::standard(1),
            &spec,
        );
        assert!(matches!(r, Err(Error::IntegralDiverged { .. })));
    }

    #[test]
    fn non_finite_integrand_aborts() {
        let r = integrate(
            |_: &Vector| Ok(f64::INFINITY),
            &LaplaceFrame::standard(1),
            &QuadratureSpec::gauss_hermite(4),
        );
        assert!(matches!(r, Err(Error::IntegralDiverged { .. })));
    }

    #[test]
    fn spec_literals() {
        let s: QuadratureSpec = serde_json::from_str(r#"{"scheme":"gauss-hermite","order":40}"#).unwrap();
        assert_eq!(s, QuadratureSpec::gauss_hermite(40));
        let s: QuadratureSpec =
            serde_json::from_str(r#"{"scheme":"monte-carlo","samples":2000000,"seed":42}"#).unwrap();
        assert_eq!(s, QuadratureSpec::monte_carlo(2_000_000, 42));
    }
}
