//! Importance sampling from the Laplace frame's Gaussian.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::{IntegrationResult, LaplaceFrame, Scheme};

/// Minimum sample count.
pub const MIN_SAMPLES: usize = 10_000;
/// Largest sample count reached by escalation.
pub const MAX_SAMPLES: usize = 1 << 26;
/// Samples per independently seeded stream.
const CHUNK: usize = 4096;

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

fn chunk_moments<G>(g: &G, frame: &LaplaceFrame, seed: u64, chunk: usize, len: usize) -> Result<Moments>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    let d = frame.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let log_norm = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() + frame.log_det_factor();
    let mut m = Moments::default();
    let mut z = Vector::zeros(d);
    for _ in 0..len {
        for j in 0..d {
            z[j] = StandardNormal.sample(&mut rng);
        }
        let x = frame.map(&z);
        let gx = g(&x)?;
        if !gx.is_finite() {
            return Err(Error::diverged(format!("non-finite integrand value {gx}")));
        }
        let w = if gx == 0.0 {
            0.0
        } else {
            gx * (log_norm + 0.5 * z.norm_squared()).exp()
        };
        m.push(w);
    }
    Ok(m)
}

fn estimate<G>(g: &G, frame: &LaplaceFrame, seed: u64, samples: usize) -> Result<Moments>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(samples - c * CHUNK);
            chunk_moments(g, frame, seed, c, len)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge))
}

/// Escalating importance-sampling integration; the error estimate is three standard errors.
pub(crate) fn integrate<G>(
    g: &G,
    frame: &LaplaceFrame,
    samples: usize,
    seed: u64,
    target: f64,
) -> Result<IntegrationResult>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let mut n = samples;
    loop {
        let m = estimate(g, frame, seed, n)?;
        let variance = if m.count > 1.0 { m.m2 / (m.count - 1.0) } else { 0.0 };
        let error = 3.0 * (variance / m.count).sqrt();
        let result = IntegrationResult {
            value: m.mean,
            error,
            evaluations: n,
            scheme: Scheme::MonteCarlo,
        };
        if error <= target * m.mean.abs() {
            return Ok(result);
        }
        if n * 2 > MAX_SAMPLES.max(samples) {
            return Err(Error::diverged(format!(
                "Monte Carlo error estimate {error:.3e} exceeds target {target:.1e}·|{:.6e}| at {n} samples",
                m.mean
            )));
        }
        n *= 2;
    }
}
