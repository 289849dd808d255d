//! Tensor Gauss–Hermite rules for the probabilists' weight `e^{-u²/2}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

use super::{pairwise_sum, IntegrationResult, LaplaceFrame, Scheme};

/// Largest number of nodes per axis.
pub const MAX_ORDER: usize = 512;
/// Largest tensor node count.
pub const MAX_NODES: usize = 10_000_000;
/// Largest dimension handled by tensor rules.
pub const MAX_DIM: usize = 4;

/// One-dimensional rule: nodes `u` and weight-divided log weights `log W`
/// such that `∫ g(u) du ≈ Σ W_k g(u_k)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached rule of the given order.
pub fn rule(order: usize) -> Arc<Rule> {
    let mut guard = cache().lock().expect("rule cache poisoned");
    Arc::clone(guard.entry(order).or_insert_with(|| Arc::new(compute_rule(order))))
}

/// Orthonormal Hermite recurrence at `z` (physicists' weight `e^{-z²}`),
/// returning `(p_n(z), p_{n−1}(z), log scale)` with values rescaled to avoid overflow.
fn orthonormal(n: usize, z: f64) -> (f64, f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut log_scale = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e150 {
            p1 *= 1e-150;
            p2 *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
    }
    (p1, p2, log_scale)
}

/// Roots from the eigenvalues of the Jacobi matrix (Golub–Welsch), each
/// polished by Newton on the orthonormal recurrence; log weights from the
/// derivative `√(2n)·p_{n−1}` so that tiny weights never underflow.
fn compute_rule(n: usize) -> Rule {
    assert!(n >= 1, "order must be positive");
    let nf = n as f64;
    let jacobi = Matrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    roots.sort_by(f64::total_cmp);
    let mut nodes = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    for (k, &z0) in roots.iter().enumerate() {
        let mut z = if n % 2 == 1 && k == n / 2 { 0.0 } else { z0 };
        for _ in 0..5 {
            let (p1, p2, _) = orthonormal(n, z);
            let dz = p1 / ((2.0 * nf).sqrt() * p2);
            if !dz.is_finite() {
                break;
            }
            z -= dz;
            if dz.abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        let (_, p2, ls) = orthonormal(n, z);
        let log_pp = ((2.0 * nf).sqrt() * p2).abs().ln() + ls;
        // physicists' weight w = 2 / pp²; probabilists' form u = √2 z, W = √2 w e^{z²}
        let log_w = std::f64::consts::LN_2 - 2.0 * log_pp;
        nodes.push(std::f64::consts::SQRT_2 * z);
        log_weights.push(half_ln2 + log_w + z * z);
    }
    // exact symmetry
    for k in 0..n / 2 {
        let u = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        let lw = 0.5 * (log_weights[k] + log_weights[n - 1 - k]);
        nodes[k] = -u;
        nodes[n - 1 - k] = u;
        log_weights[k] = lw;
        log_weights[n - 1 - k] = lw;
    }
    Rule { nodes, log_weights }
}

/// Largest per-axis order allowed in dimension `d`.
pub fn max_order(d: usize) -> usize {
    let mut o = MAX_ORDER;
    while o > 1 && (o as f64).powi(d as i32) > MAX_NODES as f64 {
        o -= 1;
    }
    o
}

/// Nodes per deterministic summation block.
const BLOCK: usize = 4096;

/// One tensor rule evaluation: `(Σ W g, Σ |W g|)`.
///
/// Nodes are split into fixed blocks; each block is summed pairwise and the
/// block sums are combined pairwise, so the result does not depend on the
/// number of worker threads.
pub(crate) fn tensor_sum<G>(g: &G, frame: &LaplaceFrame, order: usize) -> Result<(f64, f64)>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    let d = frame.dim();
    let rule = rule(order);
    let total = order.pow(d as u32);
    let log_det_l = frame.log_det_factor();
    let blocks = total.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * BLOCK).min(total);
            let mut terms = Vec::with_capacity(end - b * BLOCK);
            let mut u = Vector::zeros(d);
            for k in b * BLOCK..end {
                let mut idx = k;
                let mut lw = log_det_l;
                for j in 0..d {
                    let digit = idx % order;
                    idx /= order;
                    u[j] = rule.nodes[digit];
                    lw += rule.log_weights[digit];
                }
                let x = frame.map(&u);
                let gx = g(&x)?;
                if !gx.is_finite() {
                    return Err(Error::diverged(format!("non-finite integrand value {gx} at node {k}")));
                }
                terms.push(if gx == 0.0 { 0.0 } else { gx * lw.exp() });
            }
            let abs: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
            Ok((pairwise_sum(&terms), pairwise_sum(&abs)))
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = sums.iter().map(|s| s.0).collect();
    let masses: Vec<f64> = sums.iter().map(|s| s.1).collect();
    Ok((pairwise_sum(&values), pairwise_sum(&masses)))
}

/// Probe distance, in frame standard deviations, of the tail fit.
const TAIL_PROBE: f64 = 3.0;
/// Range of the per-axis rescaling applied by the tail fit.
const TAIL_SCALE: (f64, f64) = (0.5, 1.5);

/// Rescales the frame along its principal axes so that the integrand's
/// log-drop `TAIL_PROBE` standard deviations out matches that of the
/// Gaussian weight (on the heavier side).
///
/// Lighter-than-Gaussian tails (quartic, cosh) otherwise waste the outer
/// nodes and converge slowly; heavier ones (duals) are under-sampled. An
/// integrand that is exactly Gaussian in the frame leaves it unchanged.
pub(crate) fn tail_fit<G>(g: &G, frame: &LaplaceFrame) -> LaplaceFrame
where
    G: Fn(&Vector) -> Result<f64>,
{
    let centre = match g(frame.mode()) {
        Ok(v) if v.is_finite() && v != 0.0 => v.abs().ln(),
        _ => return frame.clone(),
    };
    let d = frame.dim();
    let eig = frame.covariance().clone().symmetric_eigen();
    let mut scales = vec![1.0; d];
    for (j, scale) in scales.iter_mut().enumerate() {
        let step = eig.eigenvectors.column(j) * (eig.eigenvalues[j].max(0.0).sqrt() * TAIL_PROBE);
        let mut drop = f64::NEG_INFINITY;
        for sign in [-1.0, 1.0] {
            if let Ok(v) = g(&(frame.mode() + &step * sign)) {
                if v.is_finite() && v != 0.0 {
                    drop = drop.max(v.abs().ln() - centre);
                }
            }
        }
        if drop == f64::NEG_INFINITY {
            continue;
        }
        let s = if drop >= 0.0 {
            TAIL_SCALE.1
        } else {
            (TAIL_PROBE / (-2.0 * drop).sqrt()).clamp(TAIL_SCALE.0, TAIL_SCALE.1)
        };
        if (s - 1.0).abs() > 1e-3 {
            *scale = s;
        }
    }
    if scales.iter().all(|&s| s == 1.0) {
        return frame.clone();
    }
    let diag = Vector::from_iterator(d, eig.eigenvalues.iter().zip(&scales).map(|(l, s)| l * s * s));
    let cov = crate::linalg::symmetrize(&(&eig.eigenvectors * Matrix::from_diagonal(&diag) * eig.eigenvectors.transpose()));
    LaplaceFrame::new(frame.mode().clone(), cov).unwrap_or_else(|_| frame.clone())
}

/// Escalating tensor Gauss–Hermite integration.
///
/// Doubles the order until `|v(o) − v(o/2)|` meets the target; at the order
/// cap the result is `IntegralDiverged`, or the best estimate when `strict` is false.
pub(crate) fn integrate<G>(
    g: &G,
    frame: &LaplaceFrame,
    order: usize,
    target: f64,
    strict: bool,
) -> Result<IntegrationResult>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    let frame = &tail_fit(g, frame);
    let d = frame.dim();
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Hermite supports 1 ≤ d ≤ {MAX_DIM}, got {d}"
        )));
    }
    let cap = max_order(d);
    if order < 2 || order > cap {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Hermite order must be in 2..={cap} for d = {d}, got {order}"
        )));
    }
    let (mut previous, _) = tensor_sum(g, frame, order / 2)?;
    let mut evaluations = (order / 2).pow(d as u32);
    let mut current = order;
    let mut best: Option<IntegrationResult> = None;
    loop {
        let (value, mass) = tensor_sum(g, frame, current)?;
        evaluations += current.pow(d as u32);
        let error = (value - previous).abs();
        if best.as_ref().is_none_or(|b| error < b.error) {
            best = Some(IntegrationResult {
                value,
                error,
                evaluations,
                scheme: Scheme::GaussHermite,
            });
        }
        let floor = 1e-15 * mass;
        let b = best.as_mut().expect("set above");
        b.evaluations = evaluations;
        if b.error <= target * b.value.abs() + floor {
            return Ok(b.clone());
        }
        let next = current * 2;
        if next > cap {
            if !strict {
                return Ok(b.clone());
            }
            return Err(Error::diverged(format!(
                "Gauss-Hermite error estimate {:.3e} exceeds target {:.1e}·|{:.6e}| at the order cap {}",
                b.error, target, b.value, current
            )));
        }
        previous = value;
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules() {
        let r = rule(1);
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.log_weights[0] - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-14);
        let r = rule(2);
        assert!((r.nodes[1] - 1.0).abs() < 1e-14 && (r.nodes[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn weights_integrate_the_weight_function() {
        for n in [3, 10, 40, 128, 512] {
            let r = rule(n);
            let s: f64 = r
                .nodes
                .iter()
                .zip(&r.log_weights)
                .map(|(u, lw)| (lw - 0.5 * u * u).exp())
                .sum();
            assert!((s / (2.0 * std::f64::consts::PI).sqrt() - 1.0).abs() < 1e-12, "order {n}: {s}");
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let r = rule(41);
        for w in r.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for k in 0..41 {
            assert!((r.nodes[k] + r.nodes[40 - k]).abs() < 1e-12);
        }
    }
}
