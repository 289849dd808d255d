//! Grid search followed by Nelder–Mead refinement.

use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::LaplaceFrame;

/// Grid points per axis.
const GRID: usize = 9;
/// Grid half-width in standard deviations.
const GRID_SPAN: f64 = 5.0;
/// Stop when the simplex diameter falls below this.
const DIAMETER_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 20_000;
/// Largest dimension for the tensor grid.
pub const MAX_DIM: usize = 3;

/// Location and value of a maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub point: Vector,
    pub value: f64,
}

fn eval<G>(g: &G, x: &Vector) -> Result<f64>
where
    G: Fn(&Vector) -> Result<f64>,
{
    let v = g(x)?;
    if v.is_nan() {
        return Err(Error::InvalidArgument("objective returned NaN".into()));
    }
    Ok(v)
}

/// Maximizes `g`, starting from the best point of a 9-per-axis grid over `m ± 5σ`.
pub fn maximize<G>(g: G, frame: &LaplaceFrame) -> Result<Maximum>
where
    G: Fn(&Vector) -> Result<f64>,
{
    let d = frame.dim();
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "maximization supports 1 ≤ d ≤ {MAX_DIM}, got {d}"
        )));
    }
    let m = frame.mode();
    let sigma: Vec<f64> = (0..d).map(|j| frame.covariance()[(j, j)].sqrt()).collect();
    let step = 2.0 * GRID_SPAN / (GRID - 1) as f64;

    let mut best_point = m.clone();
    let mut best_value = eval(&g, m)?;
    for k in 0..GRID.pow(d as u32) {
        let mut idx = k;
        let mut x = m.clone();
        for j in 0..d {
            let digit = idx % GRID;
            idx /= GRID;
            x[j] += sigma[j] * (-GRID_SPAN + step * digit as f64);
        }
        let v = eval(&g, &x)?;
        if v > best_value {
            best_value = v;
            best_point = x;
        }
    }

    // Nelder–Mead on −g. Strict comparisons make a constant objective shrink.
    let f = |x: &Vector| eval(&g, x).map(|v| -v);
    let mut simplex: Vec<(Vector, f64)> = Vec::with_capacity(d + 1);
    simplex.push((best_point.clone(), -best_value));
    for j in 0..d {
        let mut x = best_point.clone();
        x[j] += sigma[j] * step * 0.5;
        let fx = f(&x)?;
        simplex.push((x, fx));
    }
    for _ in 0..MAX_ITERATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| (x - &simplex[0].0).norm())
            .fold(0.0, f64::max);
        if diameter <= DIAMETER_TOL {
            let (point, value) = simplex.swap_remove(0);
            return Ok(Maximum { point, value: -value });
        }
        let n = d;
        let centroid = simplex[..n]
            .iter()
            .fold(Vector::zeros(d), |acc, (x, _)| acc + x)
            / n as f64;
        let worst = simplex[n].clone();
        let reflected = &centroid + (&centroid - &worst.0);
        let fr = f(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = &centroid + (&reflected - &centroid) * 2.0;
            let fe = f(&expanded)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = &centroid + (&reflected - &centroid) * 0.5;
            let fc = f(&c)?;
            (c, fc)
        } else {
            let c = &centroid + (&worst.0 - &centroid) * 0.5;
            let fc = f(&c)?;
            (c, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = &best + (&entry.0 - &best) * 0.5;
            let fx = f(&x)?;
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let diameter = simplex
        .iter()
        .skip(1)
        .map(|(x, _)| (x - &simplex[0].0).norm())
        .fold(0.0, f64::max);
    Err(Error::OptimizationFailed {
        iterations: MAX_ITERATIONS,
        residual: diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_square() {
        let m = maximize(|x: &Vector| Ok(-x.norm_squared()), &LaplaceFrame::standard(2)).unwrap();
        assert!(m.point.norm() < 1e-7);
        assert!(m.value.abs() < 1e-14);
    }

    #[test]
    fn constant_objective() {
        let m = maximize(|_: &Vector| Ok(4.0), &LaplaceFrame::standard(3)).unwrap();
        assert_eq!(m.value, 4.0);
    }

    #[test]
    fn off_center_peak() {
        let c = Vector::from_row_slice(&[0.3, -1.7]);
        let m = maximize(|x: &Vector| Ok(-(x - &c).norm_squared() + 2.0), &LaplaceFrame::standard(2)).unwrap();
        assert!((m.point - c).norm() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-14);
    }
}
