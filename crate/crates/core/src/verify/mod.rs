//! Executable catalog of the inequalities and identities satisfied by mixed
//! f-divergences and mixed affine surface areas, evaluated on seeded
//! instances with tolerance-aware verdicts.

mod checks;
pub mod instances;
pub mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

pub use instances::{Instance, InstanceFamily};
pub use report::{Fingerprint, InequalityReport, Tolerances, Verdict};

/// Names of the checks in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// Alexandrov–Fenchel inequality for mixed divergences.
    AfDivergence,
    /// Entropy bound through dual integrals, concave generators.
    Entropy,
    /// Mixed KL divergence bounded by dual-integral logarithms.
    KlBound,
    /// Mixed KL divergence bounded through the Blaschke–Santaló constant.
    KlBsBound,
    /// Duality identity for proportional vectors.
    Duality,
    /// Invariance under self-adjoint volume-preserving linear maps.
    SlInvariance,
    /// Log-convexity of the i-th mixed divergence in `i`.
    IthInterpolation,
    /// Entropy bound for the i-th mixed divergence, including reversed regimes.
    IthBound,
    /// Alexandrov–Fenchel inequality for mixed affine surface areas.
    AfSurface,
    /// Affine isoperimetric inequality.
    Isoperimetric,
    /// Blaschke–Santaló inequality for mixed affine surface areas.
    BsMixed,
    /// Monotonicity in `λ` of mixed affine surface areas.
    MonoSurface,
    /// `log Ω` bounded by the KL term.
    OmegaKl,
    /// Bounds and limit representation of `Ω`.
    OmegaBounds,
    /// Monotonicity in `λ` of i-th mixed affine surface areas.
    MonoSurfaceI,
    /// Interpolation in `i` of i-th mixed affine surface areas.
    InterpSurfaceI,
    /// Blaschke–Santaló inequality for i-th mixed affine surface areas.
    BsI,
}

impl CheckId {
    pub const ALL: [CheckId; 17] = [
        CheckId::AfDivergence,
        CheckId::Entropy,
        CheckId::KlBound,
        CheckId::KlBsBound,
        CheckId::Duality,
        CheckId::SlInvariance,
        CheckId::IthInterpolation,
        CheckId::IthBound,
        CheckId::AfSurface,
        CheckId::Isoperimetric,
        CheckId::BsMixed,
        CheckId::MonoSurface,
        CheckId::OmegaKl,
        CheckId::OmegaBounds,
        CheckId::MonoSurfaceI,
        CheckId::InterpSurfaceI,
        CheckId::BsI,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::AfDivergence => "af_divergence",
            CheckId::Entropy => "entropy",
            CheckId::KlBound => "kl_bound",
            CheckId::KlBsBound => "kl_bs_bound",
            CheckId::Duality => "duality",
            CheckId::SlInvariance => "sl_invariance",
            CheckId::IthInterpolation => "ith_interpolation",
            CheckId::IthBound => "ith_bound",
            CheckId::AfSurface => "af_surface",
            CheckId::Isoperimetric => "isoperimetric",
            CheckId::BsMixed => "bs_mixed",
            CheckId::MonoSurface => "mono_surface",
            CheckId::OmegaKl => "omega_kl",
            CheckId::OmegaBounds => "omega_bounds",
            CheckId::MonoSurfaceI => "mono_surface_i",
            CheckId::InterpSurfaceI => "interp_surface_i",
            CheckId::BsI => "bs_i",
        }
    }

    /// Position in [`CheckId::ALL`]; also separates the random streams of different checks.
    pub fn index(&self) -> usize {
        CheckId::ALL.iter().position(|c| c == self).unwrap_or(0)
    }

    /// Whether the check needs dual functions of every entry.
    pub fn uses_duals(&self) -> bool {
        matches!(
            self,
            CheckId::Entropy
                | CheckId::KlBound
                | CheckId::Duality
                | CheckId::IthBound
                | CheckId::BsMixed
                | CheckId::BsI
        )
    }

    /// Families the suite draws for this check. Numeric duals of the quartic
    /// family are avoided (its conjugate has no closed form and is the slowest
    /// to evaluate), so dual-based checks skip it.
    pub fn accepts(&self, family: InstanceFamily) -> bool {
        !(self.uses_duals() && family == InstanceFamily::Quartic)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check {s:?}")))
    }
}

/// Evaluates one check on one instance.
///
/// Gate failures (curvature, proportionality, barycenter, `λ`-range) are
/// errors; divergent integrals yield an `inconclusive` report.
pub fn check(
    id: CheckId,
    instance: &Instance,
    tolerances: &Tolerances,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    checks::run(id, instance, tolerances, spec)
}

/// Which checks to run, how many trials each, and on what instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub checks: Vec<CheckId>,
    pub trials: usize,
    pub dimension: usize,
    /// Exponent denominator; `None` pins `n = d`, the setting of the closed-form constants.
    pub n: Option<usize>,
    /// Families drawn in rotation, restricted per check to the ones it accepts.
    pub families: Vec<InstanceFamily>,
    /// `None` selects [`QuadratureSpec::default_for`] the dimension.
    pub quadrature: Option<QuadratureSpec>,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            checks: CheckId::ALL.to_vec(),
            trials: 10,
            dimension: 2,
            n: None,
            families: InstanceFamily::ALL.to_vec(),
            quadrature: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn n(&self) -> usize {
        self.n.unwrap_or(self.dimension)
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.quadrature
            .clone()
            .unwrap_or_else(|| QuadratureSpec::default_for(self.dimension))
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if self.n() == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("at least one instance family is required".into()));
        }
        self.spec()
            .validate(self.dimension)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Family used for `trial` of `id`, or `None` if no configured family fits.
    pub fn family_for(&self, id: CheckId, trial: usize) -> Option<InstanceFamily> {
        let fits: Vec<InstanceFamily> = self.families.iter().copied().filter(|f| id.accepts(*f)).collect();
        (!fits.is_empty()).then(|| fits[trial % fits.len()])
    }
}

/// Runs every configured check for `trials` seeded instances.
///
/// Deterministic for a given seed: work runs in parallel, results are ordered
/// by check then trial. Computation failures other than gate violations become
/// `inconclusive` reports with a note.
pub fn run_suite(config: &SuiteConfig, seed: u64) -> Result<Vec<InequalityReport>> {
    config.validate()?;
    let spec = config.spec();
    let jobs: Vec<(CheckId, usize, InstanceFamily)> = config
        .checks
        .iter()
        .flat_map(|&id| (0..config.trials).filter_map(move |t| config.family_for(id, t).map(|f| (id, t, f))))
        .collect();
    jobs.par_iter()
        .map(|&(id, trial, family)| {
            let instance =
                Instance::sample(family, config.dimension, config.n(), seed, id.index() as u64, trial)?;
            match check(id, &instance, &config.tolerances, &spec) {
                Ok(r) => Ok(r),
                Err(e @ Error::GateViolation { .. }) => Err(e),
                Err(e) => Ok(checks::failed_report(id, &instance, &e)),
            }
        })
        .collect()
}

/// Counts per verdict.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub holds: usize,
    pub equality: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

impl VerdictCounts {
    pub fn of(reports: &[InequalityReport]) -> Self {
        let mut c = VerdictCounts::default();
        for r in reports {
            match r.verdict {
                Verdict::Holds => c.holds += 1,
                Verdict::Equality => c.equality += 1,
                Verdict::Violated => c.violated += 1,
                Verdict::Inconclusive => c.inconclusive += 1,
            }
        }
        c
    }
}

/// Process exit status from the worst verdict: 0 all holds/equality,
/// 2 any violated, 3 any inconclusive and none violated.
pub fn exit_code(reports: &[InequalityReport]) -> i32 {
    let c = VerdictCounts::of(reports);
    if c.violated > 0 {
        2
    } else if c.inconclusive > 0 {
        3
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
        assert!(matches!("nope".parse::<CheckId>(), Err(Error::Config(_))));
    }

    #[test]
    fn empty_check_list_gives_empty_report() {
        let cfg = SuiteConfig {
            checks: vec![],
            ..SuiteConfig::default()
        };
        assert!(run_suite(&cfg, 42).unwrap().is_empty());
        assert_eq!(exit_code(&[]), 0);
    }

    #[test]
    fn family_rotation_skips_unaccepted() {
        let cfg = SuiteConfig {
            families: vec![InstanceFamily::Quartic, InstanceFamily::Cosh],
            ..SuiteConfig::default()
        };
        assert_eq!(cfg.family_for(CheckId::BsMixed, 0), Some(InstanceFamily::Cosh));
        assert_eq!(cfg.family_for(CheckId::BsMixed, 1), Some(InstanceFamily::Cosh));
        assert_eq!(cfg.family_for(CheckId::AfSurface, 0), Some(InstanceFamily::Quartic));
        assert_eq!(cfg.family_for(CheckId::AfSurface, 1), Some(InstanceFamily::Cosh));
        let only_quartic = SuiteConfig {
            families: vec![InstanceFamily::Quartic],
            ..SuiteConfig::default()
        };
        assert_eq!(only_quartic.family_for(CheckId::Entropy, 0), None);
    }
}
