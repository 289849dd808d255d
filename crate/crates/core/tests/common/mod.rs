#![allow(dead_code)]

use logdiv::function::{FunctionVector, GaussianParams, LogConcaveFunction};
use logdiv::linalg::{Matrix, Vector};
use logdiv::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn diag(xs: &[f64]) -> Matrix {
    Matrix::from_diagonal(&v(xs))
}

pub fn params(c: f64, d: &[f64]) -> GaussianParams {
    GaussianParams::new(c, diag(d)).unwrap()
}

pub fn gauss(c: f64, d: &[f64]) -> LogConcaveFunction {
    LogConcaveFunction::gaussian(&params(c, d)).unwrap()
}

pub fn vector(fs: Vec<LogConcaveFunction>) -> FunctionVector {
    FunctionVector::new(fs).unwrap()
}

pub fn spec() -> QuadratureSpec {
    QuadratureSpec::default_for(2)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Seeded points uniform in `[-r, r]^d`.
pub fn points(d: usize, count: usize, r: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Vector::from_fn(d, |_, _| rng.random_range(-r..=r)))
        .collect()
}
