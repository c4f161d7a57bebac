//! Experiment configuration (flat `key = value` text) and JSON/CSV reports.
//!
//! Config format: one `key = value` per line, `#` starts a comment, blank
//! lines are ignored. Reserved keys: `seed` (u64) and `tol` (overrides every
//! tolerance). A specific tolerance is set with `tol.<name>`. Everything else
//! is an experiment parameter; lists are comma separated.
//!
//! A case passes when |value − oracle| ≤ tol·max(1, |oracle|).

use crate::error::{LabError, Result};
use crate::operator::C64;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn parse(experiment: &str, text: &str) -> Result<Self> {
        let mut cfg = Self::new(experiment);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| LabError::Config(format!("line {}: bad seed {v:?}", lineno + 1)))?
                }
                "tol" => {
                    cfg.tol = Some(
                        v.parse()
                            .map_err(|_| LabError::Config(format!("line {}: bad tol {v:?}", lineno + 1)))?,
                    )
                }
                _ => {
                    cfg.params.insert(k.to_string(), v.to_string());
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(experiment: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(experiment, &text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| LabError::Config(format!("parameter {key}: cannot parse {v:?}"))),
        }
    }

    pub fn get_list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| LabError::Config(format!("parameter {key}: cannot parse {s:?}")))
                })
                .collect(),
        }
    }

    /// Tolerance `name`: the global override, then `tol.<name>`, then the default.
    pub fn tolerance(&self, name: &str, default: f64) -> Result<f64> {
        if let Some(t) = self.tol {
            return Ok(t);
        }
        self.get(&format!("tol.{name}"), default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex {
    pub im: f64,
    pub re: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Self { im: z.im, re: z.re }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub abs_err: f64,
    pub inputs: BTreeMap<String, Value>,
    pub key: String,
    pub oracle: Complex,
    pub pass: bool,
    pub rel_err: f64,
    pub tol: f64,
    pub value: Complex,
}

impl Case {
    pub fn new(key: impl Into<String>, value: C64, oracle: C64, tol: f64) -> Self {
        let abs_err = (value - oracle).norm();
        let scale = oracle.norm();
        let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
        Self {
            abs_err,
            inputs: BTreeMap::new(),
            key: key.into(),
            oracle: oracle.into(),
            pass: abs_err.is_finite() && abs_err <= tol * scale.max(1.0),
            rel_err,
            tol,
            value: value.into(),
        }
    }

    pub fn real(key: impl Into<String>, value: f64, oracle: f64, tol: f64) -> Self {
        Self::new(key, C64::new(value, 0.0), C64::new(oracle, 0.0), tol)
    }

    pub fn input(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.inputs.insert(name.to_string(), v.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub all_pass: bool,
    pub cases: usize,
    pub failed: usize,
    pub max_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub cases: Vec<Case>,
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub schema: u32,
    pub summary: Summary,
}

impl Report {
    /// Sorts cases by key and fills in the summary.
    pub fn assemble(cfg: &ExperimentConfig, mut cases: Vec<Case>) -> Self {
        cases.sort_by(|a, b| a.key.cmp(&b.key));
        let failed = cases.iter().filter(|c| !c.pass).count();
        let max_err = cases.iter().map(|c| c.abs_err).fold(0.0, f64::max);
        let mut params: BTreeMap<String, Value> = cfg
            .params
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        params.insert("seed".into(), Value::from(cfg.seed));
        if let Some(t) = cfg.tol {
            params.insert("tol".into(), Value::from(t));
        }
        Self {
            summary: Summary {
                all_pass: failed == 0,
                cases: cases.len(),
                failed,
                max_err,
            },
            cases,
            experiment: cfg.experiment.clone(),
            params,
            schema: SCHEMA_VERSION,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value_re,value_im,oracle_re,oracle_im,abs_err,rel_err,tol,pass\n");
        for c in &self.cases {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.key, c.value.re, c.value.im, c.oracle.re, c.oracle.im, c.abs_err, c.rel_err, c.tol, c.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_config() {
        let cfg = ExperimentConfig::parse("x", "# c\nseed = 9\nn = 4 # slices\nlist=1, 2,3\ntol.fit = 0.1\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.get::<usize>("n", 0).unwrap(), 4);
        assert_eq!(cfg.get_list::<usize>("list", &[]).unwrap(), vec![1, 2, 3]);
        assert_eq!(cfg.tolerance("fit", 1.0).unwrap(), 0.1);
        assert_eq!(cfg.tolerance("other", 1.0).unwrap(), 1.0);
        assert!(ExperimentConfig::parse("x", "oops").is_err());
        assert!(cfg.get::<usize>("list", 0).is_err());
    }

    #[test]
    fn case_pass_rule() {
        assert!(Case::real("a", 1.0 + 1e-11, 1.0, 1e-10).pass);
        assert!(!Case::real("a", 200.0 + 1e-7, 200.0, 1e-10).pass);
        assert!(!Case::real("a", f64::NAN, 0.0, 1.0).pass);
    }
}
