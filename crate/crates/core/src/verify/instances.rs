//! Seeded instance generation for the verification catalog.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{FunctionVector, GaussianParams, LogConcaveFunction};
use crate::linalg::{self, Matrix, Vector};

/// Families instances are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceFamily {
    /// Gaussians `cᵢ e^{-⟨Ax,x⟩/2}` sharing one matrix: the equality witnesses.
    Gaussian,
    /// Gaussians with independent matrices.
    GaussianGeneral,
    /// `cᵢ·e^{-Σⱼ(cosh((Tᵢx)ⱼ) − 1)}` with random symmetric positive definite `Tᵢ`.
    Cosh,
    /// `cᵢ·e^{-(|Tᵢx|²/2 + |Tᵢx|⁴/4)}`.
    Quartic,
    /// Each entry independently Gaussian or cosh-type.
    Mixed,
}

impl InstanceFamily {
    pub const ALL: [InstanceFamily; 5] = [
        InstanceFamily::Gaussian,
        InstanceFamily::GaussianGeneral,
        InstanceFamily::Cosh,
        InstanceFamily::Mixed,
        InstanceFamily::Quartic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InstanceFamily::Gaussian => "gaussian",
            InstanceFamily::GaussianGeneral => "gaussian-general",
            InstanceFamily::Cosh => "cosh",
            InstanceFamily::Quartic => "quartic",
            InstanceFamily::Mixed => "mixed",
        }
    }

    /// True when every member is Gaussian (closed-form duals, any real `λ`).
    pub fn is_gaussian(&self) -> bool {
        matches!(self, InstanceFamily::Gaussian | InstanceFamily::GaussianGeneral)
    }

    /// Whether `as_λ`-type integrands stay integrable for negative `λ`.
    pub fn admits_negative_lambda(&self) -> bool {
        matches!(
            self,
            InstanceFamily::Gaussian | InstanceFamily::GaussianGeneral | InstanceFamily::Quartic
        )
    }
}

impl fmt::Display for InstanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown instance family {s:?}")))
    }
}

/// A seeded problem instance: a function vector plus a private stream for
/// any further parameters a check draws (generators, `λ`, indices, maps).
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: InstanceFamily,
    /// Suite seed the instance was derived from.
    pub seed: u64,
    pub trial: usize,
    /// Exponent denominator `n` of the mixed quantities; `functions` holds `max(n, 2)` entries.
    pub n: usize,
    pub functions: FunctionVector,
    /// Overrides the check's own `λ` draw.
    pub lambda: Option<f64>,
    /// Overrides the trial-based choice among a check's variants.
    pub variant: Option<usize>,
    stream: u64,
}

/// Random symmetric positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd<R: Rng>(rng: &mut R, d: usize, lo: f64, hi: f64) -> Matrix {
    let g = Matrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = QR::new(g).q();
    let eig = Vector::from_fn(d, |_, _| (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp());
    linalg::symmetrize(&(&q * Matrix::from_diagonal(&eig) * q.transpose()))
}

/// Symmetric matrix with determinant one and eigenvalues spread within `[1/spread, spread]`.
pub fn random_unimodular<R: Rng>(rng: &mut R, d: usize, spread: f64) -> Matrix {
    let t = random_spd(rng, d, 1.0 / spread, spread);
    let det = linalg::det_general(&t);
    t / det.powf(1.0 / d as f64)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn random_scale<R: Rng>(rng: &mut R) -> f64 {
    log_uniform(rng, 0.5, 2.0)
}

fn gaussian<R: Rng>(rng: &mut R, a: &Matrix) -> Result<LogConcaveFunction> {
    let c = random_scale(rng);
    LogConcaveFunction::gaussian(&GaussianParams::new(c, a.clone())?)
}

fn cosh_type<R: Rng>(rng: &mut R, d: usize) -> Result<LogConcaveFunction> {
    let t = random_spd(rng, d, 0.7, 1.4);
    let c = random_scale(rng);
    LogConcaveFunction::cosh(d).compose_linear(&t)?.scaled(c)
}

fn quartic_type<R: Rng>(rng: &mut R, d: usize) -> Result<LogConcaveFunction> {
    let t = random_spd(rng, d, 0.7, 1.4);
    let c = random_scale(rng);
    LogConcaveFunction::quartic(d).compose_linear(&t)?.scaled(c)
}

/// Draws `count` functions of dimension `d` from a family.
pub fn sample_functions<R: Rng>(rng: &mut R, family: InstanceFamily, d: usize, count: usize) -> Result<FunctionVector> {
    let shared = random_spd(rng, d, 0.5, 3.0);
    let fs = (0..count)
        .map(|_| match family {
            InstanceFamily::Gaussian => gaussian(rng, &shared),
            InstanceFamily::GaussianGeneral => {
                let a = random_spd(rng, d, 0.5, 3.0);
                gaussian(rng, &a)
            }
            InstanceFamily::Cosh => cosh_type(rng, d),
            InstanceFamily::Quartic => quartic_type(rng, d),
            InstanceFamily::Mixed => {
                if rng.random::<bool>() {
                    let a = random_spd(rng, d, 0.5, 3.0);
                    gaussian(rng, &a)
                } else {
                    cosh_type(rng, d)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionVector::new(fs)
}

impl Instance {
    /// Deterministic instance for `(seed, stream, trial)`; `stream` separates checks.
    pub fn sample(family: InstanceFamily, d: usize, n: usize, seed: u64, stream: u64, trial: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::Config("dimension and n must be positive".into()));
        }
        let mut rng = Self::stream_rng(seed, stream, trial, 0);
        let functions = sample_functions(&mut rng, family, d, n.max(2))?;
        Ok(Instance {
            family,
            seed,
            trial,
            n,
            functions,
            lambda: None,
            variant: None,
            stream,
        })
    }

    /// Instance around caller-supplied functions (`n` = vector length unless it is 1).
    pub fn from_functions(family: InstanceFamily, functions: FunctionVector, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || functions.len() < n.max(2) {
            return Err(Error::InvalidArgument(format!(
                "need at least max(n, 2) = {} functions, got {}",
                n.max(2),
                functions.len()
            )));
        }
        Ok(Instance {
            family,
            seed,
            trial: 0,
            n,
            functions,
            lambda: None,
            variant: None,
            stream: 0,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_variant(mut self, variant: usize) -> Self {
        self.variant = Some(variant);
        self
    }

    pub fn dim(&self) -> usize {
        self.functions.dim()
    }

    fn stream_rng(seed: u64, stream: u64, trial: usize, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((stream << 40) ^ ((trial as u64) << 8) ^ purpose);
        rng
    }

    /// Generator for check-specific parameters, independent of the function draw.
    pub fn param_rng(&self) -> ChaCha8Rng {
        Self::stream_rng(self.seed, self.stream, self.trial, 1)
    }

    /// The first `n` functions, the vector the mixed quantities act on.
    pub fn vector(&self) -> Result<FunctionVector> {
        FunctionVector::new(self.functions.as_slice()[..self.n].to_vec())
    }

    /// `(φ₁, φ₂)` for the i-th quantities.
    pub fn pair(&self) -> (&LogConcaveFunction, &LogConcaveFunction) {
        (&self.functions[0], &self.functions[1])
    }

    /// `φᵢ = aᵢ·φ₁` with seeded `aᵢ ∈ [0.5, 2]`.
    pub fn proportional_vector<R: Rng>(&self, rng: &mut R) -> Result<(FunctionVector, Vec<f64>)> {
        let base = &self.functions[0];
        let scales: Vec<f64> = (0..self.n).map(|_| random_scale(rng)).collect();
        let fs = scales
            .iter()
            .map(|&a| base.scaled(a))
            .collect::<Result<Vec<_>>>()?;
        Ok((FunctionVector::new(fs)?, scales))
    }

    pub fn descriptors(&self) -> Vec<String> {
        self.functions.iter().map(LogConcaveFunction::describe).collect()
    }
}

/// Uniform draw from `[lo, hi]`.
pub(crate) fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Uniform choice from a non-empty slice.
pub(crate) fn choose<R: Rng, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}
