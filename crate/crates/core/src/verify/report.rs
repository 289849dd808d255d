//! Verdicts, tolerances and the report record emitted per check evaluation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::quadrature::{IntegrationResult, Scheme};

/// Outcome of comparing both sides of an inequality or identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equality,
    Holds,
    Inconclusive,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equality => "equality",
            Verdict::Holds => "holds",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Violated => "violated",
        })
    }
}

/// Tolerance policy.
///
/// Gauss–Hermite: `max(absolute, relative·max(|LHS|,|RHS|))`; Monte Carlo:
/// `mc_factor` times the combined standard error. The equality tolerance is
/// `equality_factor` times the holds tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub relative: f64,
    pub absolute: f64,
    pub mc_factor: f64,
    pub equality_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            relative: 1e-6,
            absolute: 1e-9,
            mc_factor: 4.0,
            equality_factor: 10.0,
        }
    }
}

/// Seed and descriptors identifying the instance a report was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub trial: usize,
    pub family: String,
    pub functions: Vec<String>,
    pub generators: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
}

/// One evaluated check. `slack = rhs − lhs`; every check is oriented so that
/// the claim reads `lhs ≤ rhs` (or `lhs = rhs` for identities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: String,
    pub variant: String,
    #[serde(with = "nullable")]
    pub lhs: f64,
    #[serde(with = "nullable")]
    pub rhs: f64,
    #[serde(with = "nullable")]
    pub slack: f64,
    #[serde(with = "nullable")]
    pub tolerance: f64,
    #[serde(with = "nullable")]
    pub equality_tolerance: f64,
    /// Propagated numerical error estimate of the slack.
    #[serde(with = "nullable")]
    pub error: f64,
    pub verdict: Verdict,
    pub fingerprint: Fingerprint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Non-finite floats are written as `null` and read back as NaN.
mod nullable {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// A computed quantity with an absolute error estimate; `mc` marks Monte Carlo provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Q {
    pub value: f64,
    pub error: f64,
    pub mc: bool,
}

impl Q {
    pub fn exact(value: f64) -> Self {
        Q {
            value,
            error: 0.0,
            mc: false,
        }
    }

    pub fn new(value: f64, error: f64, mc: bool) -> Self {
        Q { value, error, mc }
    }

    pub fn pow(self, e: f64) -> Self {
        if e == 0.0 {
            return Q::exact(1.0);
        }
        let value = self.value.powf(e);
        let error = if self.value == 0.0 {
            self.error.powf(e)
        } else {
            (e * value / self.value).abs() * self.error
        };
        Q {
            value,
            error,
            mc: self.mc,
        }
    }

    pub fn mul(self, o: Q) -> Self {
        Q {
            value: self.value * o.value,
            error: (self.error * o.value).hypot(self.value * o.error),
            mc: self.mc || o.mc,
        }
    }

    pub fn div(self, o: Q) -> Self {
        self.mul(o.pow(-1.0))
    }

    pub fn scale(self, k: f64) -> Self {
        Q {
            value: self.value * k,
            error: self.error * k.abs(),
            mc: self.mc,
        }
    }

    /// `g(x)` with derivative `g'(x)` for first-order error propagation.
    pub fn map(self, value: f64, derivative: f64) -> Self {
        Q {
            value,
            error: (derivative * self.error).abs(),
            mc: self.mc,
        }
    }

    pub fn product(items: impl IntoIterator<Item = Q>) -> Self {
        items.into_iter().fold(Q::exact(1.0), Q::mul)
    }
}

impl From<&IntegrationResult> for Q {
    fn from(r: &IntegrationResult) -> Self {
        Q {
            value: r.value,
            error: r.error,
            mc: r.scheme == Scheme::MonteCarlo,
        }
    }
}

impl From<IntegrationResult> for Q {
    fn from(r: IntegrationResult) -> Self {
        Q::from(&r)
    }
}

/// Claim shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    AtMost,
    Equal,
}

/// Both sides plus the policy inputs.
pub(crate) struct Comparison {
    pub lhs: Q,
    pub rhs: Q,
    pub relation: Relation,
    /// Additional absolute tolerance from approximations beyond quadrature (limits).
    pub extra_tolerance: f64,
}

pub(crate) struct Judgement {
    pub slack: f64,
    pub tolerance: f64,
    pub equality_tolerance: f64,
    pub error: f64,
    pub verdict: Verdict,
}

/// Applies the tolerance policy.
///
/// `violated` iff `slack < −tol`, `equality` iff `|slack| ≤ eq_tol`; when the
/// numerical error exceeds the tolerance and swamps `|slack|`, the verdict is
/// `inconclusive` instead. Identities are `violated` whenever `|slack| > eq_tol`.
pub(crate) fn judge(c: &Comparison, tol: &Tolerances) -> Judgement {
    let (l, r) = (c.lhs, c.rhs);
    let slack = r.value - l.value;
    let error = l.error.hypot(r.error);
    let mc = l.mc || r.mc;
    let scale = l.value.abs().max(r.value.abs());
    let base = if mc {
        (tol.mc_factor * error / 3.0).max(tol.absolute)
    } else {
        tol.absolute.max(tol.relative * scale)
    };
    let tolerance = base + c.extra_tolerance;
    let equality_tolerance = tol.equality_factor * tolerance;
    let unresolved = !mc && error > tolerance && slack.abs() <= error;
    let verdict = if !(slack.is_finite() && error.is_finite()) || unresolved {
        Verdict::Inconclusive
    } else {
        match c.relation {
            Relation::Equal if slack.abs() <= equality_tolerance => Verdict::Equality,
            Relation::Equal => Verdict::Violated,
            Relation::AtMost if slack < -tolerance => Verdict::Violated,
            Relation::AtMost if slack.abs() <= equality_tolerance => Verdict::Equality,
            Relation::AtMost => Verdict::Holds,
        }
    };
    Judgement {
        slack,
        tolerance,
        equality_tolerance,
        error,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmp(l: f64, r: f64, err: f64, relation: Relation) -> Verdict {
        judge(
            &Comparison {
                lhs: Q::new(l, err, false),
                rhs: Q::exact(r),
                relation,
                extra_tolerance: 0.0,
            },
            &Tolerances::default(),
        )
        .verdict
    }

    #[test]
    fn verdict_policy() {
        assert_eq!(cmp(1.0, 2.0, 0.0, Relation::AtMost), Verdict::Holds);
        assert_eq!(cmp(1.0, 1.0 + 5e-6, 0.0, Relation::AtMost), Verdict::Equality);
        assert_eq!(cmp(1.0, 1.0 - 5e-7, 0.0, Relation::AtMost), Verdict::Equality);
        assert_eq!(cmp(1.0, 1.0 - 2e-6, 0.0, Relation::AtMost), Verdict::Violated);
        assert_eq!(cmp(1.0, 1.0 - 2e-6, 1e-3, Relation::AtMost), Verdict::Inconclusive);
        assert_eq!(cmp(1.0, 2.0, 1e-3, Relation::AtMost), Verdict::Holds);
        assert_eq!(cmp(1.0, 1.0 + 1e-4, 0.0, Relation::Equal), Verdict::Violated);
        assert_eq!(cmp(f64::NAN, 1.0, 0.0, Relation::AtMost), Verdict::Inconclusive);
    }

    #[test]
    fn monte_carlo_tolerance_uses_standard_errors() {
        let j = judge(
            &Comparison {
                lhs: Q::new(1.0, 3e-3, true),
                rhs: Q::new(1.0 - 3e-3, 0.0, false),
                relation: Relation::AtMost,
                extra_tolerance: 0.0,
            },
            &Tolerances::default(),
        );
        assert!((j.tolerance - 4e-3).abs() < 1e-15);
        assert_eq!(j.verdict, Verdict::Equality);
    }

    #[test]
    fn error_propagation() {
        let a = Q::new(2.0, 0.02, false);
        let p = a.pow(3.0);
        assert!((p.value - 8.0).abs() < 1e-15 && (p.error - 0.24).abs() < 1e-12);
        let m = a.mul(Q::new(3.0, 0.03, false));
        assert!((m.error - (0.06f64).hypot(0.06)).abs() < 1e-15);
    }

    #[test]
    fn nan_round_trips_as_null() {
        let r = InequalityReport {
            check: "x".into(),
            variant: "v".into(),
            lhs: f64::NAN,
            rhs: 1.0,
            slack: f64::NAN,
            tolerance: 1e-9,
            equality_tolerance: 1e-8,
            error: f64::INFINITY,
            verdict: Verdict::Inconclusive,
            fingerprint: Fingerprint {
                seed: 1,
                trial: 0,
                family: "gaussian".into(),
                functions: vec![],
                generators: vec![],
                parameters: BTreeMap::new(),
            },
            note: Some("diverged".into()),
        };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"lhs\":null"));
        let back: InequalityReport = serde_json::from_str(&s).unwrap();
        assert!(back.lhs.is_nan() && back.rhs == 1.0);
    }
}
