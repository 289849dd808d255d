//! JSON run configuration shared by the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{FunctionVector, GaussianParams, LogConcaveFunction};
use crate::generator::Generator;
use crate::linalg;
use crate::quadrature::QuadratureSpec;
use crate::verify::{CheckId, InstanceFamily, SuiteConfig, Tolerances};

fn one() -> f64 {
    1.0
}

/// A function literal: `{"family":"gaussian","c":1.0,"A":[[…]]}`, `{"family":"cosh"}`,
/// `{"family":"quartic"}` or `{"family":"linear-composed","inner":{…},"T":[[…]]}`.
///
/// `c` (default 1) is the multiplicative constant; cosh and quartic take the
/// run dimension unless `d` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Gaussian {
        #[serde(default = "one")]
        c: f64,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
    Cosh {
        #[serde(default = "one")]
        c: f64,
        #[serde(default)]
        d: Option<usize>,
    },
    Quartic {
        #[serde(default = "one")]
        c: f64,
        #[serde(default)]
        d: Option<usize>,
    },
    /// `φ∘T` for a self-adjoint unimodular `T`.
    LinearComposed {
        inner: Box<FunctionSpec>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
    },
}

impl FunctionSpec {
    pub fn build(&self, dimension: usize) -> Result<LogConcaveFunction> {
        match self {
            FunctionSpec::Gaussian { c, a } => {
                LogConcaveFunction::gaussian(&GaussianParams::new(*c, linalg::from_rows(a)?)?)
            }
            FunctionSpec::Cosh { c, d } => LogConcaveFunction::cosh(d.unwrap_or(dimension)).scaled(*c),
            FunctionSpec::Quartic { c, d } => LogConcaveFunction::quartic(d.unwrap_or(dimension)).scaled(*c),
            FunctionSpec::LinearComposed { inner, t } => inner.build(dimension)?.apply_selfadjoint(&linalg::from_rows(t)?),
        }
    }
}

/// A complete run description. Every field except `dimension` is optional;
/// command-line flags override the corresponding entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    /// One generator per function, e.g. `{"kind":"power","lambda":0.5}`.
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    /// Checks for `verify`; empty selects the full catalog.
    #[serde(default)]
    pub checks: Vec<CheckId>,
    /// Directory receiving `reports.jsonl` / `sweep.csv`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub families: Vec<InstanceFamily>,
    /// Exponent denominator `n`; defaults to the number of functions
    /// (or to the dimension for `verify`).
    #[serde(default)]
    pub n_w: Option<f64>,
    /// Index of the i-th mixed quantities.
    #[serde(default)]
    pub i: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    /// Requires `n = d`, the setting in which the closed-form constants hold.
    #[serde(default)]
    pub paper_n: bool,
}

impl RunConfig {
    /// Minimal configuration for the given dimension.
    pub fn new(dimension: usize) -> Self {
        RunConfig {
            dimension,
            functions: Vec::new(),
            generators: Vec::new(),
            quadrature: None,
            checks: Vec::new(),
            output: None,
            seed: None,
            trials: None,
            families: Vec::new(),
            n_w: None,
            i: None,
            lambda: None,
            tolerances: None,
            paper_n: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !self.generators.is_empty() && !self.functions.is_empty() && self.generators.len() != self.functions.len() {
            return Err(Error::Config(format!(
                "{} generators for {} functions",
                self.generators.len(),
                self.functions.len()
            )));
        }
        for g in &self.generators {
            g.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(q) = &self.quadrature {
            q.validate(self.dimension).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(n) = self.n_w {
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::Config(format!("n_w must be positive, got {n}")));
            }
        }
        self.function_vector_opt()?;
        Ok(())
    }

    fn function_vector_opt(&self) -> Result<Option<FunctionVector>> {
        if self.functions.is_empty() {
            return Ok(None);
        }
        let fs = self
            .functions
            .iter()
            .map(|f| f.build(self.dimension))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(format!("invalid function: {e}")))?;
        if let Some(f) = fs.iter().find(|f| f.dim() != self.dimension) {
            return Err(Error::Config(format!(
                "function of dimension {} in a run of dimension {}",
                f.dim(),
                self.dimension
            )));
        }
        Ok(Some(FunctionVector::new(fs).map_err(|e| Error::Config(e.to_string()))?))
    }

    /// The configured functions (at least one is required).
    pub fn function_vector(&self) -> Result<FunctionVector> {
        self.function_vector_opt()?
            .ok_or_else(|| Error::Config("the configuration lists no functions".into()))
    }

    /// The configured generators (one per function is required).
    pub fn generator_list(&self, count: usize) -> Result<Vec<Generator>> {
        if self.generators.len() != count {
            return Err(Error::Config(format!(
                "expected {count} generators, the configuration lists {}",
                self.generators.len()
            )));
        }
        Ok(self.generators.clone())
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.quadrature
            .clone()
            .unwrap_or_else(|| QuadratureSpec::default_for(self.dimension))
    }

    /// Exponent denominator for a vector of `len` functions.
    pub fn n_w_for(&self, len: usize) -> Result<f64> {
        let n = self.n_w.unwrap_or(len as f64);
        if self.paper_n && n != self.dimension as f64 {
            return Err(Error::Config(format!(
                "closed-form constant mode requires n = d, got n = {n}, d = {}",
                self.dimension
            )));
        }
        Ok(n)
    }

    /// Suite settings derived from this configuration.
    pub fn suite(&self) -> Result<SuiteConfig> {
        let mut s = SuiteConfig {
            dimension: self.dimension,
            quadrature: self.quadrature.clone(),
            ..SuiteConfig::default()
        };
        if !self.checks.is_empty() {
            s.checks = self.checks.clone();
        }
        if !self.families.is_empty() {
            s.families = self.families.clone();
        }
        if let Some(t) = self.trials {
            s.trials = t;
        }
        if let Some(t) = self.tolerances {
            s.tolerances = t;
        }
        if let Some(n) = self.n_w {
            if n.fract() != 0.0 {
                return Err(Error::Config(format!("verify needs an integral n, got {n}")));
            }
            s.n = Some(n as usize);
        }
        if self.paper_n && s.n() != self.dimension {
            return Err(Error::Config(format!(
                "closed-form constant mode requires n = d, got n = {}, d = {}",
                s.n(),
                self.dimension
            )));
        }
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_function_literals() {
        let cfg = RunConfig::from_json(
            r#"{
                "dimension": 2,
                "functions": [
                    {"family": "gaussian", "c": 2.0, "A": [[1.0, 0.0], [0.0, 4.0]]},
                    {"family": "cosh"},
                    {"family": "quartic", "c": 0.5},
                    {"family": "linear-composed", "inner": {"family": "cosh"}, "T": [[2.0, 0.0], [0.0, 0.5]]}
                ],
                "generators": [
                    {"kind": "power", "lambda": 0.5}, {"kind": "log"}, {"kind": "tv"}, {"kind": "log+"}
                ]
            }"#,
        )
        .unwrap();
        let fv = cfg.function_vector().unwrap();
        assert_eq!(fv.len(), 4);
        assert!((fv[0].scale() - 2.0).abs() < 1e-15);
        assert_eq!(cfg.generator_list(4).unwrap()[2], Generator::AbsMinusOne);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"dimension": 0}"#,
            r#"{"dimension": 2, "bogus": 1}"#,
            r#"{"dimension": 2, "functions": [{"family": "triangle"}]}"#,
            r#"{"dimension": 2, "functions": [{"family": "gaussian", "A": [[1.0, 2.0], [2.0, 1.0]]}]}"#,
            r#"{"dimension": 2, "functions": [{"family": "linear-composed", "inner": {"family": "cosh"}, "T": [[2.0, 0.0], [0.0, 2.0]]}]}"#,
            r#"{"dimension": 2, "functions": [{"family": "cosh", "d": 3}]}"#,
            r#"{"dimension": 2, "functions": [{"family": "cosh"}], "generators": [{"kind": "log"}, {"kind": "log"}]}"#,
            r#"{"dimension": 2, "checks": ["nope"]}"#,
        ];
        for text in bad {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn constant_mode_pins_n_to_d() {
        let mut cfg = RunConfig::new(2);
        cfg.paper_n = true;
        assert_eq!(cfg.n_w_for(2).unwrap(), 2.0);
        assert!(cfg.n_w_for(3).is_err());
        cfg.n_w = Some(3.0);
        assert!(cfg.suite().is_err());
    }
}
