//! The individual checks. Every claim is oriented as `lhs ≤ rhs` (or `lhs = rhs`).

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::instances::{choose, random_unimodular, uniform, Instance, InstanceFamily};
use super::report::{judge, Comparison, Fingerprint, InequalityReport, Relation, Tolerances, Verdict, Q};
use super::CheckId;
use crate::conjugate::dual_function;
use crate::divergence::{self, DivergenceInstance};
use crate::error::{Error, Result};
use crate::function::{barycenter, FunctionVector, LogConcaveFunction};
use crate::generator::{common_curvature, Curvature, Generator};
use crate::linalg::Matrix;
use crate::quadrature::{IntegrationResult, QuadratureSpec};
use crate::surface;

/// Relative error target for integrands with a kink (`[log t]₊`).
const KINK_TARGET: f64 = 1e-4;
/// Linear contraction making the negatively weighted entry decay slower.
const RESHAPE: f64 = 0.8;
/// `α` values of the `α → 1` limit representation of `Ω`.
const LIMIT_ALPHAS: [f64; 2] = [0.99, 0.999];

const UNIT_LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const POSITIVE_LAMBDAS: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
const NEGATIVE_LAMBDAS: [f64; 2] = [-0.5, -0.25];

/// A claim `lhs ≤ rhs` or `lhs = rhs`.
struct Claim {
    lhs: Q,
    rhs: Q,
    relation: Relation,
    extra_tolerance: f64,
}

impl Claim {
    fn at_most(lhs: Q, rhs: Q) -> Self {
        Claim {
            lhs,
            rhs,
            relation: Relation::AtMost,
            extra_tolerance: 0.0,
        }
    }

    /// `lhs ≥ rhs`, stored as `rhs ≤ lhs`.
    fn at_least(lhs: Q, rhs: Q) -> Self {
        Self::at_most(rhs, lhs)
    }

    fn equal(lhs: Q, rhs: Q) -> Self {
        Claim {
            relation: Relation::Equal,
            ..Self::at_most(lhs, rhs)
        }
    }

    fn widened(mut self, extra: f64) -> Self {
        self.extra_tolerance = extra;
        self
    }
}

/// Per-evaluation state: parameter stream plus everything that goes into the fingerprint.
struct Ctx<'a> {
    id: CheckId,
    inst: &'a Instance,
    spec: &'a QuadratureSpec,
    rng: ChaCha8Rng,
    variant: String,
    generators: Vec<Generator>,
    params: BTreeMap<String, f64>,
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn concave_generator(rng: &mut ChaCha8Rng) -> Generator {
    Generator::power(round3(uniform(rng, 0.0, 1.0)))
}

fn convex_generator(rng: &mut ChaCha8Rng, negative_ok: bool) -> Generator {
    if negative_ok && rng.random_bool(0.3) {
        Generator::power(round3(uniform(rng, -0.3, -0.1)))
    } else {
        Generator::power(round3(uniform(rng, 1.25, 2.0)))
    }
}

fn q(r: IntegrationResult) -> Q {
    Q::from(r)
}

fn ln(x: Q) -> Q {
    x.map(x.value.ln(), 1.0 / x.value)
}

impl<'a> Ctx<'a> {
    fn new(id: CheckId, inst: &'a Instance, spec: &'a QuadratureSpec) -> Self {
        Ctx {
            id,
            inst,
            spec,
            rng: inst.param_rng(),
            variant: "default".into(),
            generators: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    fn n(&self) -> usize {
        self.inst.n
    }

    fn nf(&self) -> f64 {
        self.inst.n as f64
    }

    fn family(&self) -> InstanceFamily {
        self.inst.family
    }

    /// Selects among the named variants by override or trial index.
    fn pick(&mut self, names: &[String]) -> usize {
        let k = self.inst.variant.unwrap_or(self.inst.trial) % names.len();
        self.variant = names[k].clone();
        k
    }

    fn pick_str(&mut self, names: &[&str]) -> usize {
        let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        self.pick(&owned)
    }

    fn set(&mut self, key: &str, v: f64) -> f64 {
        self.params.insert(key.to_string(), v);
        v
    }

    fn lambda_from(&mut self, grid: &[f64]) -> f64 {
        let l = match self.inst.lambda {
            Some(l) => l,
            None => choose(&mut self.rng, grid),
        };
        self.set("lambda", l)
    }

    fn lambda_grid(&self) -> Vec<f64> {
        let mut g = POSITIVE_LAMBDAS.to_vec();
        if self.family().admits_negative_lambda() {
            g.extend(NEGATIVE_LAMBDAS);
        }
        g.sort_by(f64::total_cmp);
        g
    }

    fn i_grid(&self) -> Vec<f64> {
        (0..=2 * self.n()).map(|k| k as f64 * 0.5).collect()
    }

    fn gate(&self, ok: bool, reason: impl Into<String>) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::gate(self.id.name(), reason))
        }
    }

    fn unit_lambda_gate(&self, lambda: f64) -> Result<()> {
        self.gate((0.0..=1.0).contains(&lambda), format!("λ = {lambda} outside [0, 1]"))
    }

    fn barycenter_gate(&self, fs: &[&LogConcaveFunction]) -> Result<()> {
        for f in fs {
            let b = barycenter(f, self.spec)?;
            let worst = b.point.amax();
            self.gate(
                worst <= 1e-8 + 10.0 * b.error,
                format!("barycenter {:?} of {} is not at the origin", b.point.as_slice(), f.describe()),
            )?;
        }
        Ok(())
    }

    fn generator_gate(&self, gens: &[Generator], allowed: &[Curvature]) -> Result<()> {
        self.gate(
            gens.iter().all(Generator::is_nonnegative),
            "generators must be nonnegative",
        )?;
        self.gate(
            gens.iter().all(|g| allowed.contains(&g.curvature())),
            format!("generator curvature must be one of {allowed:?}"),
        )
    }

    fn mass(&self, f: &LogConcaveFunction) -> Result<Q> {
        Ok(q(divergence::classical(Generator::power(0.0), f, self.spec)?))
    }

    fn dual_mass(&self, f: &LogConcaveFunction) -> Result<Q> {
        self.mass(&dual_function(f)?)
    }

    fn duals(&self, fv: &FunctionVector) -> Result<FunctionVector> {
        fv.map(dual_function)
    }

    fn mixed(&self, fv: &FunctionVector, gens: &[Generator]) -> Result<Q> {
        let inst = DivergenceInstance::new(fv.clone(), gens.to_vec())?;
        Ok(q(divergence::mixed(&inst, self.spec)?))
    }

    fn classical(&self, g: Generator, f: &LogConcaveFunction) -> Result<Q> {
        Ok(q(divergence::classical(g, f, self.spec)?))
    }

    fn ith(&self, f1: Generator, f2: Generator, p1: &LogConcaveFunction, p2: &LogConcaveFunction, i: f64) -> Result<Q> {
        Ok(q(divergence::ith_mixed(f1, f2, p1, p2, i, self.nf(), self.spec)?))
    }

    fn as_l(&self, fv: &FunctionVector, lambda: f64) -> Result<Q> {
        Ok(q(surface::as_lambda(fv, lambda, self.spec)?))
    }

    fn as_single(&self, f: &LogConcaveFunction, lambda: f64) -> Result<Q> {
        self.as_l(&FunctionVector::new(vec![f.clone()])?, lambda)
    }

    fn as_i(&self, p1: &LogConcaveFunction, p2: &LogConcaveFunction, lambda: f64, i: f64) -> Result<Q> {
        Ok(q(surface::as_lambda_i(p1, p2, lambda, i, self.nf(), self.spec)?))
    }

    /// `f(I°/I)·I`, the single-function entropy bound.
    fn entropy_term(&self, g: Generator, f: &LogConcaveFunction) -> Result<Q> {
        let mass = self.mass(f)?;
        let ratio = self.dual_mass(f)?.div(mass);
        Ok(apply_generator(g, ratio)?.mul(mass))
    }

    /// `φ∘(0.8·I)` with a fresh constant, decaying slower than `φ`.
    fn reshaped(&mut self, f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
        let d = f.dim();
        let c = round3(uniform(&mut self.rng, 0.5, 2.0));
        self.set("reshaped_c", c);
        Ok(f.compose_linear(&(Matrix::identity(d, d) * RESHAPE))?.with_log_scale(c.ln()))
    }

    fn report(self, claim: Claim, tol: &Tolerances) -> InequalityReport {
        let j = judge(
            &Comparison {
                lhs: claim.lhs,
                rhs: claim.rhs,
                relation: claim.relation,
                extra_tolerance: claim.extra_tolerance,
            },
            tol,
        );
        InequalityReport {
            check: self.id.name().to_string(),
            variant: self.variant.clone(),
            lhs: claim.lhs.value,
            rhs: claim.rhs.value,
            slack: j.slack,
            tolerance: j.tolerance,
            equality_tolerance: j.equality_tolerance,
            error: j.error,
            verdict: j.verdict,
            fingerprint: self.fingerprint(),
            note: None,
        }
    }

    fn inconclusive(self, e: &Error) -> InequalityReport {
        InequalityReport {
            check: self.id.name().to_string(),
            variant: self.variant.clone(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            tolerance: f64::NAN,
            equality_tolerance: f64::NAN,
            error: f64::NAN,
            verdict: Verdict::Inconclusive,
            fingerprint: self.fingerprint(),
            note: Some(e.to_string()),
        }
    }

    fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            seed: self.inst.seed,
            trial: self.inst.trial,
            family: self.inst.family.name().to_string(),
            functions: self.inst.descriptors(),
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            parameters: self.params.clone(),
        }
    }
}

/// `f(t)` with first-order error propagation (central difference slope).
fn apply_generator(g: Generator, t: Q) -> Result<Q> {
    let value = g.eval(t.value)?;
    let h = 1e-6 * t.value.abs().max(1e-12);
    let slope = (g.eval(t.value + h)? - g.eval((t.value - h).max(0.0))?) / (t.value + h - (t.value - h).max(0.0));
    Ok(t.map(value, slope))
}

pub(super) fn run(id: CheckId, inst: &Instance, tol: &Tolerances, spec: &QuadratureSpec) -> Result<InequalityReport> {
    let mut ctx = Ctx::new(id, inst, spec);
    let claim = match id {
        CheckId::AfDivergence => af_divergence(&mut ctx),
        CheckId::Entropy => entropy(&mut ctx),
        CheckId::KlBound => kl_bound(&mut ctx),
        CheckId::KlBsBound => kl_bs_bound(&mut ctx),
        CheckId::Duality => duality(&mut ctx),
        CheckId::SlInvariance => sl_invariance(&mut ctx),
        CheckId::IthInterpolation => ith_interpolation(&mut ctx),
        CheckId::IthBound => ith_bound(&mut ctx),
        CheckId::AfSurface => af_surface(&mut ctx),
        CheckId::Isoperimetric => isoperimetric(&mut ctx),
        CheckId::BsMixed => bs_mixed(&mut ctx),
        CheckId::MonoSurface => mono_surface(&mut ctx),
        CheckId::OmegaKl => omega_kl(&mut ctx),
        CheckId::OmegaBounds => omega_bounds(&mut ctx),
        CheckId::MonoSurfaceI => mono_surface_i(&mut ctx),
        CheckId::InterpSurfaceI => interp_surface_i(&mut ctx),
        CheckId::BsI => bs_i(&mut ctx),
    };
    match claim {
        Ok(c) => Ok(ctx.report(c, tol)),
        Err(e @ Error::IntegralDiverged { .. }) => Ok(ctx.inconclusive(&e)),
        Err(e) => Err(e),
    }
}

/// Inconclusive report for a computation that failed outright.
pub(super) fn failed_report(id: CheckId, inst: &Instance, e: &Error) -> InequalityReport {
    Ctx::new(id, inst, &QuadratureSpec::gauss_hermite(2)).inconclusive(e)
}

fn m_names(n: usize) -> Vec<String> {
    (1..=n).map(|m| format!("m={m}")).collect()
}

/// Draws generators that are all concave or all convex.
fn uniform_curvature_generators(ctx: &mut Ctx<'_>) -> Vec<Generator> {
    let concave = ctx.rng.random_bool(0.5);
    let negative_ok = ctx.family().admits_negative_lambda();
    (0..ctx.n())
        .map(|_| {
            if concave {
                concave_generator(&mut ctx.rng)
            } else {
                convex_generator(&mut ctx.rng, negative_ok)
            }
        })
        .collect()
}

fn af_divergence(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let n = ctx.n();
    let m = ctx.pick(&m_names(n)) + 1;
    let gens = uniform_curvature_generators(ctx);
    ctx.generators = gens.clone();
    ctx.gate(
        matches!(common_curvature(&gens), Some(Curvature::Convex | Curvature::Concave)),
        "generators must be all convex or all concave",
    )?;
    ctx.generator_gate(&gens, &[Curvature::Convex, Curvature::Concave])?;
    let fv = ctx.inst.vector()?;
    let d = ctx.mixed(&fv, &gens)?;
    let rhs = if m == n {
        let parts = fv
            .iter()
            .zip(&gens)
            .map(|(f, &g)| ctx.classical(g, f))
            .collect::<Result<Vec<_>>>()?;
        Q::product(parts)
    } else {
        let parts = (n - m + 1..=n)
            .map(|k| ctx.mixed(&surface::repeat_vector(&fv, m, k)?, &surface::repeat_entries(&gens, m, k)?))
            .collect::<Result<Vec<_>>>()?;
        Q::product(parts)
    };
    Ok(Claim::at_most(d.pow(m as f64), rhs))
}

fn entropy(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let gens: Vec<Generator> = (0..ctx.n()).map(|_| concave_generator(&mut ctx.rng)).collect();
    ctx.generators = gens.clone();
    ctx.generator_gate(&gens, &[Curvature::Concave])?;
    let fv = ctx.inst.vector()?;
    let lhs = ctx.mixed(&fv, &gens)?.pow(ctx.nf());
    let parts = fv
        .iter()
        .zip(&gens)
        .map(|(f, &g)| ctx.entropy_term(g, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(Claim::at_most(lhs, Q::product(parts)))
}

fn mixed_kl_power(ctx: &mut Ctx<'_>, fv: &FunctionVector) -> Result<Q> {
    ctx.generators = vec![Generator::LogPlus; fv.len()];
    let spec = ctx.spec.at_least(KINK_TARGET);
    Ok(q(divergence::mixed_kl_best_effort(fv, &spec)?).pow(ctx.nf()))
}

fn kl_bound(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let fv = ctx.inst.vector()?;
    let lhs = mixed_kl_power(ctx, &fv)?;
    let parts = fv
        .iter()
        .map(|f| ctx.entropy_term(Generator::LogPlus, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(Claim::at_most(lhs, Q::product(parts)))
}

fn kl_bs_bound(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let fv = ctx.inst.vector()?;
    ctx.barycenter_gate(&fv.iter().collect::<Vec<_>>())?;
    let lhs = mixed_kl_power(ctx, &fv)?;
    let santalo = Q::exact(TAU.powi(fv.dim() as i32));
    let parts = fv
        .iter()
        .map(|f| {
            let mass = ctx.mass(f)?;
            Ok(apply_generator(Generator::LogPlus, santalo.div(mass.pow(2.0)))?.mul(mass))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Claim::at_most(lhs, Q::product(parts)))
}

fn record_scales(ctx: &mut Ctx<'_>, scales: &[f64]) {
    for (k, a) in scales.iter().enumerate() {
        ctx.set(&format!("a{}", k + 1), *a);
    }
}

fn duality(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let (pv, scales) = ctx.inst.proportional_vector(&mut ctx.rng)?;
    record_scales(ctx, &scales);
    let convex_ok = ctx.family().is_gaussian();
    let gens: Vec<Generator> = (0..ctx.n())
        .map(|_| {
            if convex_ok && ctx.rng.random_bool(0.3) {
                convex_generator(&mut ctx.rng, false)
            } else {
                concave_generator(&mut ctx.rng)
            }
        })
        .collect();
    ctx.generators = gens.clone();
    ctx.generator_gate(&gens, &[Curvature::Convex, Curvature::Concave])?;
    ctx.gate(pv.is_proportional(), "entries must be proportional to one function")?;
    let adjoints: Vec<Generator> = gens.iter().map(Generator::adjoint).collect();
    let lhs = ctx.mixed(&ctx.duals(&pv)?, &gens)?;
    let rhs = ctx.mixed(&pv, &adjoints)?;
    Ok(Claim::equal(lhs, rhs))
}

fn sl_invariance(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let d = ctx.inst.dim();
    let t = random_unimodular(&mut ctx.rng, d, 1.5);
    for r in 0..d {
        for c in r..d {
            ctx.set(&format!("t{}{}", r + 1, c + 1), t[(r, c)]);
        }
    }
    let gens = uniform_curvature_generators(ctx);
    ctx.generators = gens.clone();
    ctx.generator_gate(&gens, &[Curvature::Convex, Curvature::Concave])?;
    let fv = ctx.inst.vector()?;
    let lhs = ctx.mixed(&fv.apply_selfadjoint(&t)?, &gens)?;
    let rhs = ctx.mixed(&fv, &gens)?;
    Ok(Claim::equal(lhs, rhs))
}

/// `(j, i, k)` from the grid with `i` strictly between `j` and `k`, in either order.
fn interpolation_triple(ctx: &mut Ctx<'_>, grid: &[f64]) -> (f64, f64, f64) {
    let mut idx: Vec<usize> = Vec::with_capacity(3);
    while idx.len() < 3 {
        let k = ctx.rng.random_range(0..grid.len());
        if !idx.contains(&k) {
            idx.push(k);
        }
    }
    idx.sort_unstable();
    let (lo, mid, hi) = (grid[idx[0]], grid[idx[1]], grid[idx[2]]);
    let (j, k) = if ctx.rng.random_bool(0.5) { (lo, hi) } else { (hi, lo) };
    ctx.set("j", j);
    ctx.set("i", mid);
    ctx.set("k", k);
    (j, mid, k)
}

/// `D(j)^{(k−i)/(k−j)} · D(k)^{(i−j)/(k−j)}`.
fn interpolate(dj: Q, dk: Q, j: f64, i: f64, k: f64) -> Q {
    dj.pow((k - i) / (k - j)).mul(dk.pow((i - j) / (k - j)))
}

fn either_generator(ctx: &mut Ctx<'_>) -> Generator {
    let negative_ok = ctx.family().admits_negative_lambda();
    if ctx.rng.random_bool(0.5) {
        concave_generator(&mut ctx.rng)
    } else {
        convex_generator(&mut ctx.rng, negative_ok)
    }
}

fn ith_interpolation(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let f1 = either_generator(ctx);
    let f2 = either_generator(ctx);
    ctx.generators = vec![f1, f2];
    ctx.generator_gate(&[f1, f2], &[Curvature::Convex, Curvature::Concave])?;
    let grid = ctx.i_grid();
    let (j, i, k) = interpolation_triple(ctx, &grid);
    let (p1, p2) = ctx.inst.pair();
    let lhs = ctx.ith(f1, f2, p1, p2, i)?;
    let rhs = interpolate(ctx.ith(f1, f2, p1, p2, j)?, ctx.ith(f1, f2, p1, p2, k)?, j, i, k);
    Ok(Claim::at_most(lhs, rhs))
}

fn ith_bound(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let variant = ctx.pick_str(&["concave", "reversed-convex-first", "reversed-concave-first"]);
    let n = ctx.nf();
    let (p1, p2) = ctx.inst.pair();
    let (mut p1, mut p2) = (p1.clone(), p2.clone());
    let shared = ctx.family() == InstanceFamily::Gaussian;
    let (f1, f2, i) = match variant {
        0 => {
            let f1 = concave_generator(&mut ctx.rng);
            let f2 = concave_generator(&mut ctx.rng);
            let grid = ctx.i_grid();
            (f1, f2, choose(&mut ctx.rng, &grid))
        }
        1 => {
            let f1 = convex_generator(&mut ctx.rng, false);
            let f2 = concave_generator(&mut ctx.rng);
            let i = n + choose(&mut ctx.rng, &[0.5, 1.0]);
            if !shared {
                p2 = ctx.reshaped(&p1)?;
            }
            (f1, f2, i)
        }
        _ => {
            let f1 = concave_generator(&mut ctx.rng);
            let f2 = convex_generator(&mut ctx.rng, false);
            let i = -choose(&mut ctx.rng, &[0.5, 1.0]);
            if !shared {
                p1 = ctx.reshaped(&p2)?;
            }
            (f1, f2, i)
        }
    };
    ctx.set("i", i);
    ctx.generators = vec![f1, f2];
    let expect = match variant {
        0 => [Curvature::Concave, Curvature::Concave],
        1 => [Curvature::Convex, Curvature::Concave],
        _ => [Curvature::Concave, Curvature::Convex],
    };
    ctx.generator_gate(&[f1, f2], &[Curvature::Convex, Curvature::Concave])?;
    ctx.gate(
        f1.curvature() == expect[0] && f2.curvature() == expect[1],
        "generator curvatures do not match the regime",
    )?;
    let range_ok = match variant {
        0 => (0.0..=n).contains(&i),
        1 => i >= n,
        _ => i <= 0.0,
    };
    ctx.gate(range_ok, format!("i = {i} outside the admissible range"))?;
    let d = ctx.ith(f1, f2, &p1, &p2, i)?.pow(n);
    let bound = ctx
        .entropy_term(f1, &p1)?
        .pow(i)
        .mul(ctx.entropy_term(f2, &p2)?.pow(n - i));
    Ok(if variant == 0 {
        Claim::at_most(d, bound)
    } else {
        Claim::at_least(d, bound)
    })
}

fn af_surface(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let n = ctx.n();
    let m = ctx.pick(&m_names(n)) + 1;
    let grid = ctx.lambda_grid();
    let lambda = ctx.lambda_from(&grid);
    let fv = ctx.inst.vector()?;
    let lhs = ctx.as_l(&fv, lambda)?.pow(m as f64);
    let rhs = if m == n {
        Q::product(fv.iter().map(|f| ctx.as_single(f, lambda)).collect::<Result<Vec<_>>>()?)
    } else {
        Q::product(
            (n - m + 1..=n)
                .map(|k| ctx.as_l(&surface::repeat_vector(&fv, m, k)?, lambda))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    Ok(Claim::at_most(lhs, rhs))
}

fn isoperimetric(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let lambda = ctx.lambda_from(&UNIT_LAMBDAS);
    ctx.unit_lambda_gate(lambda)?;
    let fv = ctx.inst.vector()?;
    ctx.barycenter_gate(&fv.iter().collect::<Vec<_>>())?;
    // as_λ(g, …, g) = ∫g = (2π)^{d/2} for the standard Gaussian g.
    let g = TAU.powf(fv.dim() as f64 / 2.0);
    let lhs = ctx.as_l(&fv, lambda)?.scale(1.0 / g).pow(ctx.nf());
    let parts = fv
        .iter()
        .map(|f| Ok(ctx.mass(f)?.scale(1.0 / g).pow(1.0 - 2.0 * lambda)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Claim::at_most(lhs, Q::product(parts)))
}

fn bs_mixed(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let lambda = ctx.lambda_from(&UNIT_LAMBDAS);
    ctx.unit_lambda_gate(lambda)?;
    let fv = ctx.inst.vector()?;
    ctx.barycenter_gate(&fv.iter().collect::<Vec<_>>())?;
    let lhs = ctx.as_l(&fv, lambda)?.mul(ctx.as_l(&ctx.duals(&fv)?, lambda)?);
    Ok(Claim::at_most(lhs, Q::exact(TAU.powi(fv.dim() as i32))))
}

/// Parameters of one monotonicity comparison.
enum Mono {
    /// `as_λ ≤ as_α^{(λ−β)/(α−β)} · as_β^{(α−λ)/(α−β)}`.
    ThreePoint { alpha: f64, beta: f64 },
    /// `as_λ ≤ as_α^{λ/α} · as_0^{(α−λ)/α}`.
    Zero { alpha: f64 },
    /// `as_λ ≤ as_∞^{λ−β} · as_β`.
    Infinity { beta: f64 },
}

fn draw_mono(ctx: &mut Ctx<'_>) -> Result<(f64, Mono)> {
    let variant = ctx.pick_str(&["three-point", "zero-endpoint", "infinity-endpoint"]);
    let grid = ctx.lambda_grid();
    let fixed = ctx.inst.lambda;
    let (lambda, mono) = match variant {
        0 => {
            let (lambda, alpha, beta) = match fixed {
                Some(l) => (l, l + 0.5, l - 0.5),
                None => {
                    let (beta, lambda, alpha) = interpolation_triple(ctx, &grid);
                    (lambda, alpha, beta)
                }
            };
            let ratio = (alpha - beta) / (lambda - beta);
            ctx.gate(ratio.is_finite() && ratio >= 1.0, format!("(α−β)/(λ−β) = {ratio} must lie in [1, ∞)"))?;
            (lambda, Mono::ThreePoint { alpha, beta })
        }
        1 => {
            let (lambda, alpha) = match fixed {
                Some(l) => (l, 2.0 * l),
                None if ctx.family().admits_negative_lambda() && ctx.rng.random_bool(0.3) => (-0.25, -0.5),
                None => {
                    let positive: Vec<f64> = grid.iter().copied().filter(|&x| x > 0.0).collect();
                    let a = ctx.rng.random_range(0..positive.len() - 1);
                    let b = ctx.rng.random_range(a + 1..positive.len());
                    (positive[a], positive[b])
                }
            };
            ctx.gate(lambda != 0.0 && alpha / lambda >= 1.0, format!("α/λ = {} must be at least 1", alpha / lambda))?;
            (lambda, Mono::Zero { alpha })
        }
        _ => {
            let (lambda, beta) = match fixed {
                Some(l) => (l, l - 0.5),
                None => {
                    let a = ctx.rng.random_range(0..grid.len() - 1);
                    let b = ctx.rng.random_range(a + 1..grid.len());
                    (grid[b], grid[a])
                }
            };
            ctx.gate(beta <= lambda, format!("β = {beta} must not exceed λ = {lambda}"))?;
            (lambda, Mono::Infinity { beta })
        }
    };
    ctx.set("lambda", lambda);
    match mono {
        Mono::ThreePoint { alpha, beta } => {
            ctx.set("alpha", alpha);
            ctx.set("beta", beta);
        }
        Mono::Zero { alpha } => {
            ctx.set("alpha", alpha);
        }
        Mono::Infinity { beta } => {
            ctx.set("beta", beta);
        }
    }
    Ok((lambda, mono))
}

/// Evaluates a monotonicity claim given `as_·` and `as_∞` of the same arguments.
fn mono_claim(
    lambda: f64,
    mono: Mono,
    area: impl Fn(f64) -> Result<Q>,
    infinity: impl Fn() -> Result<f64>,
) -> Result<Claim> {
    let lhs = area(lambda)?;
    let rhs = match mono {
        Mono::ThreePoint { alpha, beta } => {
            let w = (lambda - beta) / (alpha - beta);
            area(alpha)?.pow(w).mul(area(beta)?.pow(1.0 - w))
        }
        Mono::Zero { alpha } => area(alpha)?.pow(lambda / alpha).mul(area(0.0)?.pow((alpha - lambda) / alpha)),
        Mono::Infinity { beta } => Q::exact(infinity()?).pow(lambda - beta).mul(area(beta)?),
    };
    Ok(Claim::at_most(lhs, rhs))
}

fn mono_surface(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let (lambda, mono) = draw_mono(ctx)?;
    let fv = ctx.inst.vector()?;
    let c = &*ctx;
    mono_claim(lambda, mono, |l| c.as_l(&fv, l), || Ok(surface::as_infinity(&fv)?.value))
}

fn mono_surface_i(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let (lambda, mono) = draw_mono(ctx)?;
    let grid = ctx.i_grid();
    let i = choose(&mut ctx.rng, &grid);
    ctx.set("i", i);
    let (p1, p2) = ctx.inst.pair();
    let n = ctx.nf();
    let c = &*ctx;
    mono_claim(
        lambda,
        mono,
        |l| c.as_i(p1, p2, l, i),
        || Ok(surface::as_infinity_i(p1, p2, i, n)?.value),
    )
}

fn omega_kl(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let fv = ctx.inst.vector()?;
    let om = divergence::omega(&fv, ctx.spec)?;
    Ok(Claim::at_most(
        Q::new(om.log_value, om.error, ctx.spec.scheme() == crate::quadrature::Scheme::MonteCarlo),
        Q::exact(om.kl_term),
    ))
}

fn omega_q(ctx: &Ctx<'_>, fv: &FunctionVector) -> Result<Q> {
    let om = divergence::omega(fv, ctx.spec)?;
    let mc = ctx.spec.scheme() == crate::quadrature::Scheme::MonteCarlo;
    Ok(Q::new(om.log_value, om.error, mc))
}

fn omega_bounds(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let mut names = vec!["quotient-positive"];
    if ctx.family().admits_negative_lambda() {
        names.push("quotient-negative");
    }
    if ctx.family() != InstanceFamily::Quartic {
        names.extend(["dual-product", "limit"]);
    }
    let k = ctx.pick_str(&names);
    match names[k] {
        "quotient-positive" | "quotient-negative" => {
            let negative = names[k] == "quotient-negative";
            let grid: &[f64] = if negative { &[-0.5, -0.25] } else { &[0.25, 0.5, 1.0] };
            let lambda = ctx.lambda_from(grid);
            ctx.gate(lambda != 0.0, "λ must be nonzero")?;
            let fv = ctx.inst.vector()?;
            let log_omega = omega_q(ctx, &fv)?;
            let quotient = ln(ctx.as_l(&fv, lambda)?.div(ctx.as_l(&fv, 0.0)?)).scale(1.0 / lambda);
            let exp = |x: Q| x.map(x.value.exp(), x.value.exp());
            let (omega, quotient) = (exp(log_omega), exp(quotient));
            Ok(if lambda > 0.0 {
                Claim::at_most(omega, quotient)
            } else {
                Claim::at_least(omega, quotient)
            })
        }
        "dual-product" => {
            let (pv, scales) = ctx.inst.proportional_vector(&mut ctx.rng)?;
            record_scales(ctx, &scales);
            ctx.gate(pv.is_proportional(), "entries must be proportional to one function")?;
            let a = omega_q(ctx, &pv)?;
            let b = omega_q(ctx, &ctx.duals(&pv)?)?;
            let log_sum = a.value + b.value;
            let prod = Q::new(log_sum, a.error.hypot(b.error), a.mc).map(log_sum.exp(), log_sum.exp());
            Ok(Claim::at_most(prod, Q::exact(1.0)))
        }
        _ => {
            let (pv, scales) = ctx.inst.proportional_vector(&mut ctx.rng)?;
            record_scales(ctx, &scales);
            ctx.gate(pv.is_proportional(), "entries must be proportional to one function")?;
            let duals = ctx.duals(&pv)?;
            let base = ln(ctx.as_l(&pv, 0.0)?);
            let h = |alpha: f64| -> Result<Q> {
                let top = ln(ctx.as_l(&duals, alpha)?);
                let diff = Q::new(top.value - base.value, top.error.hypot(base.error), top.mc || base.mc);
                Ok(diff.scale(1.0 / (1.0 - alpha)))
            };
            let [a1, a2] = LIMIT_ALPHAS;
            let (h1, h2) = (h(a1)?, h(a2)?);
            // First-order Richardson extrapolation to α = 1.
            let (e1, e2) = (1.0 - a1, 1.0 - a2);
            let value = (e1 * h2.value - e2 * h1.value) / (e1 - e2);
            let error = (e1 * h2.error).hypot(e2 * h1.error) / (e1 - e2);
            ctx.set("h_0.99", h1.value);
            ctx.set("h_0.999", h2.value);
            let limit = Q::new(value, error, h1.mc);
            let log_omega = omega_q(ctx, &pv)?;
            let extra = 0.1 * (value - h2.value).abs() + error.hypot(log_omega.error);
            Ok(Claim::equal(log_omega, limit).widened(extra))
        }
    }
}

fn interp_surface_i(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let variant = ctx.pick_str(&["log-convexity", "upper", "lower"]);
    let grid = ctx.lambda_grid();
    let lambda = ctx.lambda_from(&grid);
    let n = ctx.nf();
    let (p1, p2) = ctx.inst.pair();
    let (p1, p2) = (p1.clone(), p2.clone());
    match variant {
        0 => {
            let i_grid = ctx.i_grid();
            let (j, i, k) = interpolation_triple(ctx, &i_grid);
            let lhs = ctx.as_i(&p1, &p2, lambda, i)?;
            let rhs = interpolate(ctx.as_i(&p1, &p2, lambda, j)?, ctx.as_i(&p1, &p2, lambda, k)?, j, i, k);
            Ok(Claim::at_most(lhs, rhs))
        }
        1 => {
            let i_grid = ctx.i_grid();
            let i = choose(&mut ctx.rng, &i_grid);
            ctx.set("i", i);
            ctx.gate((0.0..=n).contains(&i), format!("i = {i} outside [0, n]"))?;
            let lhs = ctx.as_i(&p1, &p2, lambda, i)?.pow(n);
            let rhs = ctx
                .as_single(&p2, lambda)?
                .pow(n - i)
                .mul(ctx.as_single(&p1, lambda)?.pow(i));
            Ok(Claim::at_most(lhs, rhs))
        }
        _ => {
            let k = -choose(&mut ctx.rng, &[0.5, 1.0]);
            ctx.set("i", k);
            ctx.gate(k <= 0.0, format!("i = {k} must be at most 0"))?;
            let p1 = if ctx.family() == InstanceFamily::Gaussian {
                p1
            } else {
                ctx.reshaped(&p2)?
            };
            let lhs = ctx.as_i(&p1, &p2, lambda, k)?.pow(n);
            let rhs = ctx
                .as_single(&p2, lambda)?
                .pow(n - k)
                .mul(ctx.as_single(&p1, lambda)?.pow(k));
            Ok(Claim::at_least(lhs, rhs))
        }
    }
}

fn bs_i(ctx: &mut Ctx<'_>) -> Result<Claim> {
    let lambda = ctx.lambda_from(&UNIT_LAMBDAS);
    ctx.unit_lambda_gate(lambda)?;
    let grid = ctx.i_grid();
    let i = choose(&mut ctx.rng, &grid);
    ctx.set("i", i);
    ctx.gate((0.0..=ctx.nf()).contains(&i), format!("i = {i} outside [0, n]"))?;
    let (p1, p2) = ctx.inst.pair();
    ctx.barycenter_gate(&[p1, p2])?;
    let (d1, d2) = (dual_function(p1)?, dual_function(p2)?);
    let lhs = ctx.as_i(p1, p2, lambda, i)?.mul(ctx.as_i(&d1, &d2, lambda, i)?);
    Ok(Claim::at_most(lhs, Q::exact(TAU.powi(p1.dim() as i32))))
}
