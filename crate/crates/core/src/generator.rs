//! Divergence generators `f: [0,∞] → [−∞,∞]`, their `*`-adjoints, and
//! log-domain evaluation used inside integrands.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A divergence generator from the built-in catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Generator {
    /// `t^λ`
    #[serde(rename = "power")]
    Power { lambda: f64 },
    /// `log t`
    #[serde(rename = "log")]
    Log,
    /// `max(log t, 0)`
    #[serde(rename = "log+")]
    LogPlus,
    /// `|t − 1|` (total variation)
    #[serde(rename = "tv")]
    AbsMinusOne,
    /// `−t·log t`, the adjoint of [`Generator::Log`]
    #[serde(rename = "neg-tlog")]
    NegTLog,
    /// `t·max(−log t, 0)`, the adjoint of [`Generator::LogPlus`]
    #[serde(rename = "neg-tlog+")]
    NegTLogPlus,
}

/// Curvature of a generator on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Convex,
    Concave,
    /// Piecewise definitions with a kink of the "wrong" sign.
    Neither,
}

/// A real number `sign·e^{log_abs}`; `sign = 0` encodes exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const INFINITY: SignedLog = SignedLog {
        sign: 1,
        log_abs: f64::INFINITY,
    };

    pub fn positive(log_abs: f64) -> Self {
        if log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: 1, log_abs }
        }
    }

    /// Signed log of a real value.
    pub fn of(value: f64) -> Self {
        if value == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if value > 0.0 { 1 } else { -1 },
                log_abs: value.abs().ln(),
            }
        }
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// Multiplies by the positive number `e^{log_factor}`.
    pub fn times_exp(self, log_factor: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: self.sign,
                log_abs: self.log_abs + log_factor,
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.sign != 0 && self.log_abs == f64::INFINITY
    }
}

impl Generator {
    pub fn power(lambda: f64) -> Self {
        Generator::Power { lambda }
    }

    /// `f*(t) = t·f(1/t)`.
    pub fn adjoint(&self) -> Self {
        match *self {
            Generator::Power { lambda } => Generator::Power { lambda: 1.0 - lambda },
            Generator::Log => Generator::NegTLog,
            Generator::NegTLog => Generator::Log,
            Generator::LogPlus => Generator::NegTLogPlus,
            Generator::NegTLogPlus => Generator::LogPlus,
            Generator::AbsMinusOne => Generator::AbsMinusOne,
        }
    }

    pub fn curvature(&self) -> Curvature {
        match *self {
            Generator::Power { lambda } if (0.0..=1.0).contains(&lambda) => Curvature::Concave,
            Generator::Power { .. } => Curvature::Convex,
            Generator::Log | Generator::NegTLog => Curvature::Concave,
            Generator::AbsMinusOne => Curvature::Convex,
            Generator::LogPlus | Generator::NegTLogPlus => Curvature::Neither,
        }
    }

    /// Degree `h` with `f(st) = s^h f(t)`, when it exists.
    pub fn homogeneity(&self) -> Option<f64> {
        match *self {
            Generator::Power { lambda } => Some(lambda),
            _ => None,
        }
    }

    /// True when `f ≥ 0` on `[0, ∞]`, as required for fractional powers.
    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, Generator::Log | Generator::NegTLog)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Generator::Power { lambda } if !lambda.is_finite() => Err(Error::InvalidArgument(format!(
                "power generator needs a finite exponent, got {lambda}"
            ))),
            _ => Ok(()),
        }
    }

    /// `f(t)` for `t ∈ [0, ∞]`, with the limit conventions `0^λ = 0` (λ > 0),
    /// `0^0 = 1`, `0^λ = ∞` (λ < 0) and `log 0 = −∞`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::DomainError { t });
        }
        Ok(self.eval_log(t.ln()).value())
    }

    /// `f(e^{lt})` as a signed logarithm; `lt ∈ [−∞, ∞]`.
    pub fn eval_log(&self, lt: f64) -> SignedLog {
        match *self {
            Generator::Power { lambda } => {
                if lambda == 0.0 {
                    SignedLog::positive(0.0)
                } else {
                    SignedLog::positive(lambda * lt)
                }
            }
            Generator::Log => SignedLog::of(lt),
            Generator::LogPlus => {
                if lt > 0.0 {
                    SignedLog::positive(lt.ln())
                } else {
                    SignedLog::ZERO
                }
            }
            Generator::AbsMinusOne => {
                if lt > 30.0 {
                    SignedLog::positive(lt + (-(-lt).exp()).ln_1p())
                } else {
                    SignedLog::of(lt.exp_m1().abs())
                }
            }
            Generator::NegTLog => {
                if lt == f64::NEG_INFINITY || lt == 0.0 {
                    SignedLog::ZERO
                } else if lt == f64::INFINITY {
                    SignedLog {
                        sign: -1,
                        log_abs: f64::INFINITY,
                    }
                } else {
                    SignedLog {
                        sign: if lt > 0.0 { -1 } else { 1 },
                        log_abs: lt + lt.abs().ln(),
                    }
                }
            }
            Generator::NegTLogPlus => {
                if lt < 0.0 && lt > f64::NEG_INFINITY {
                    SignedLog::positive(lt + (-lt).ln())
                } else {
                    SignedLog::ZERO
                }
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Power { lambda } => write!(f, "power({lambda})"),
            Generator::Log => write!(f, "log"),
            Generator::LogPlus => write!(f, "log+"),
            Generator::AbsMinusOne => write!(f, "tv"),
            Generator::NegTLog => write!(f, "neg-tlog"),
            Generator::NegTLogPlus => write!(f, "neg-tlog+"),
        }
    }
}

/// Ordered list of generators paired with a function vector.
pub type GeneratorVector = Vec<Generator>;

/// Common curvature of all entries, if uniform.
pub fn common_curvature(gens: &[Generator]) -> Option<Curvature> {
    let first = gens.first()?.curvature();
    gens.iter().all(|g| g.curvature() == first).then_some(first)
}

/// `Π factorᵢ^{eᵢ}` from signed-log factors.
///
/// A zero exponent contributes 1; an exponent of exactly 1 accepts negative
/// factors; any other exponent on a negative factor is an error. Infinite
/// factors with positive exponents make the product diverge.
pub(crate) fn weighted_product(terms: &[(SignedLog, f64)]) -> Result<f64> {
    let mut sign: i8 = 1;
    let mut log_abs = 0.0;
    let mut zero = false;
    for &(factor, e) in terms {
        if e == 0.0 {
            continue;
        }
        match factor.sign {
            0 => {
                if e < 0.0 {
                    return Err(Error::diverged("zero factor raised to a negative power"));
                }
                zero = true;
                continue;
            }
            -1 if e != 1.0 => {
                return Err(Error::NegativeFactor {
                    value: -factor.log_abs.exp(),
                })
            }
            s => sign *= s,
        }
        if factor.log_abs.is_nan() {
            return Err(Error::diverged("undefined integrand factor"));
        }
        log_abs += e * factor.log_abs;
    }
    if zero {
        return Ok(0.0);
    }
    if log_abs == f64::INFINITY || log_abs.is_nan() {
        return Err(Error::diverged("infinite integrand value"));
    }
    Ok(f64::from(sign) * log_abs.exp())
}
