//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. A JSON metadata file written
//! by a previous run is accepted too: its `config` object is read back with
//! the same keys. Flags and `--set key=value` override the file.

use std::collections::BTreeMap;
use std::path::Path;

use dyncorr::bounds::{grid_from_zero, lambda_grid};
use dyncorr::models::{AncillaStateSpec, HamiltonianSpec, SiteAngles, System, SystemStateSpec, Term};
use dyncorr::oracle::CorrelationQuery;
use dyncorr::protocols::snimp::{CouplingForm, Timing};
use dyncorr::spin::{Axis, Convention, Spin, SpinRegister};
use dyncorr::C64;

use crate::expr::eval;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Io(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': {message}")]
    Value { key: String, message: String },
    #[error("key '{0}' is required for this command")]
    Missing(String),
}

/// Every recognized key with its default (empty means unset).
pub const KEYS: &[(&str, &str)] = &[
    ("spin", "1/2"),
    ("sites", "2"),
    ("convention", "pauli"),
    ("hamiltonian", "ising-xx"),
    ("hamiltonian_n", "1,0,0"),
    ("hamiltonian_m", "1,0,0"),
    ("terms", ""),
    ("state", "angles"),
    ("alpha", "pi/3,pi/3"),
    ("theta", "pi/7,pi/5"),
    ("amplitudes", ""),
    ("ancilla", "uniform"),
    ("site_i", "0"),
    ("site_j", "1"),
    ("axis_a", "z"),
    ("axis_b", "z"),
    ("t1", "1"),
    ("t2", "10"),
    ("t3", ""),
    ("lambda", "0.42"),
    ("lambda2", ""),
    ("timing", "deferred"),
    ("form", "exact"),
    ("n", "10000"),
    ("seed", "42"),
    ("shards", "1"),
    ("rotation_angle", "3*pi/2"),
    ("lambda_step", "0.005"),
    ("lambda_max", "1"),
    ("cnimp_step", "0.01"),
    ("cnimp_max", "1"),
    ("sample_sizes", "1e2,1e3,1e4,1e5,1e6,1e7,1e8"),
    ("accuracy", "0.1"),
    ("protocol", "snimp"),
    ("target", "c12"),
    ("output", ""),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Default for Config {
    fn default() -> Self {
        Config {
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        let mut c = Config::default();
        if text.trim_start().starts_with('{') {
            c.merge_json(&text)?;
        } else {
            c.merge_text(&text)?;
        }
        Ok(c)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: k + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn merge_json(&mut self, text: &str) -> Result<(), ConfigError> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.line(),
            message: e.to_string(),
        })?;
        let obj = v
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| ConfigError::Syntax { line: 1, message: "JSON config needs a 'config' object".into() })?;
        for (key, value) in obj {
            let value = value.as_str().ok_or_else(|| ConfigError::Value {
                key: key.clone(),
                message: "values must be strings".into(),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !known(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// `key=value` from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            message: format!("--set expects key=value, got '{pair}'"),
        })?;
        self.set(k.trim(), v.trim())
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn float(&self, key: &str) -> Result<f64, ConfigError> {
        if !self.is_set(key) {
            return Err(ConfigError::Missing(key.to_string()));
        }
        eval(self.raw(key)).map_err(|e| self.bad(key, e.to_string()))
    }

    pub fn optional_float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.is_set(key) {
            self.float(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.raw(key)
            .split(',')
            .map(|s| eval(s.trim()).map_err(|e| self.bad(key, e.to_string())))
            .collect()
    }

    pub fn uint(&self, key: &str) -> Result<u64, ConfigError> {
        let raw = self.raw(key);
        if let Ok(v) = raw.parse::<u64>() {
            return Ok(v);
        }
        let v = self.float(key)?;
        if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(self.bad(key, format!("expected a non-negative integer, got '{raw}'")));
        }
        Ok(v as u64)
    }

    fn index(&self, key: &str) -> Result<usize, ConfigError> {
        Ok(self.uint(key)? as usize)
    }

    fn axis(&self, key: &str) -> Result<Axis, ConfigError> {
        self.raw(key).parse().map_err(|_| self.bad(key, "expected x, y or z"))
    }

    fn vector(&self, key: &str) -> Result<[f64; 3], ConfigError> {
        let v = self.floats(key)?;
        v.try_into().map_err(|_| self.bad(key, "expected three components"))
    }

    fn complexes(&self, key: &str, text: &str) -> Result<Vec<C64>, ConfigError> {
        text.split(',')
            .map(|part| {
                let mut it = part.split(':');
                let re = eval(it.next().unwrap().trim()).map_err(|e| self.bad(key, e.to_string()))?;
                let im = match it.next() {
                    Some(s) => eval(s.trim()).map_err(|e| self.bad(key, e.to_string()))?,
                    None => 0.0,
                };
                if it.next().is_some() {
                    return Err(self.bad(key, "complex numbers are written re:im"));
                }
                Ok(C64::new(re, im))
            })
            .collect()
    }

    pub fn register(&self) -> Result<SpinRegister, ConfigError> {
        let spin: Spin = self.raw("spin").parse().map_err(|_| self.bad("spin", "expected a half-integer like 1/2 or 1"))?;
        let convention: Convention = self.raw("convention").parse().map_err(|e: dyncorr::Error| self.bad("convention", e.to_string()))?;
        SpinRegister::new(self.index("sites")?, spin, 0, convention).map_err(|e| self.bad("spin", e.to_string()))
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec, ConfigError> {
        match self.raw("hamiltonian") {
            "ising-xx" => Ok(HamiltonianSpec::IsingXx),
            "axis-pair" => Ok(HamiltonianSpec::AxisPair {
                n: self.vector("hamiltonian_n")?,
                m: self.vector("hamiltonian_m")?,
            }),
            "terms" => self.terms().map(HamiltonianSpec::LocalTerms),
            other => Err(self.bad("hamiltonian", format!("expected ising-xx, axis-pair or terms, got '{other}'"))),
        }
    }

    /// `terms = 1.0 x0 x1; 0.5 z0` is `1.0 S_0^x S_1^x + 0.5 S_0^z`.
    fn terms(&self) -> Result<Vec<Term>, ConfigError> {
        if !self.is_set("terms") {
            return Err(ConfigError::Missing("terms".into()));
        }
        self.raw("terms")
            .split(';')
            .map(|term| {
                let mut words = term.split_whitespace();
                let coefficient = eval(words.next().unwrap_or("")).map_err(|e| self.bad("terms", e.to_string()))?;
                let factors = words
                    .map(|w| {
                        let (axis, site) = w.split_at(1);
                        let axis: Axis = axis.parse().map_err(|_| self.bad("terms", format!("bad factor '{w}'")))?;
                        let site: usize = site.parse().map_err(|_| self.bad("terms", format!("bad factor '{w}'")))?;
                        Ok((site, axis))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                Ok(Term { coefficient, factors })
            })
            .collect()
    }

    pub fn system_state(&self) -> Result<SystemStateSpec, ConfigError> {
        match self.raw("state") {
            "angles" => {
                let (alpha, theta) = (self.floats("alpha")?, self.floats("theta")?);
                if alpha.len() != theta.len() {
                    return Err(self.bad("theta", "needs one angle per entry of alpha"));
                }
                Ok(SystemStateSpec::Angles(
                    alpha.into_iter().zip(theta).map(|(alpha, theta)| SiteAngles { alpha, theta }).collect(),
                ))
            }
            "product" => Ok(SystemStateSpec::Product(
                self.raw("amplitudes")
                    .split(';')
                    .map(|site| self.complexes("amplitudes", site))
                    .collect::<Result<_, _>>()?,
            )),
            "full" => Ok(SystemStateSpec::Full(self.complexes("amplitudes", self.raw("amplitudes"))?)),
            other => Err(self.bad("state", format!("expected angles, product or full, got '{other}'"))),
        }
    }

    pub fn ancilla(&self) -> Result<AncillaStateSpec, ConfigError> {
        match self.raw("ancilla") {
            "uniform" => Ok(AncillaStateSpec::Uniform),
            coefficients => Ok(AncillaStateSpec::Coefficients(self.complexes("ancilla", coefficients)?)),
        }
    }

    pub fn system(&self) -> Result<System, dyncorr::Error> {
        let reg = self.register().map_err(to_input)?;
        System::new(&reg, &self.hamiltonian().map_err(to_input)?, &self.system_state().map_err(to_input)?)
    }

    pub fn query(&self) -> Result<CorrelationQuery, ConfigError> {
        let q = CorrelationQuery::new(
            self.index("site_i")?,
            self.axis("axis_a")?,
            self.float("t1")?,
            self.index("site_j")?,
            self.axis("axis_b")?,
            self.float("t2")?,
        );
        Ok(match self.optional_float("t3")? {
            Some(t3) => q.with_t3(t3),
            None => q,
        })
    }

    pub fn timing(&self) -> Result<Timing, ConfigError> {
        match self.raw("timing") {
            "deferred" => Ok(Timing::Deferred),
            "immediate" => Ok(Timing::Immediate),
            other => Err(self.bad("timing", format!("expected deferred or immediate, got '{other}'"))),
        }
    }

    pub fn form(&self) -> Result<CouplingForm, ConfigError> {
        match self.raw("form") {
            "exact" => Ok(CouplingForm::Exact),
            "linearized" => Ok(CouplingForm::Linearized),
            other => Err(self.bad("form", format!("expected exact or linearized, got '{other}'"))),
        }
    }

    pub fn lambda_grid(&self) -> Result<Vec<f64>, ConfigError> {
        lambda_grid(self.float("lambda_step")?, self.float("lambda_max")?).map_err(|e| self.bad("lambda_step", e.to_string()))
    }

    pub fn cnimp_grid(&self) -> Result<Vec<f64>, ConfigError> {
        grid_from_zero(self.float("cnimp_step")?, self.float("cnimp_max")?).map_err(|e| self.bad("cnimp_step", e.to_string()))
    }
}

/// Config problems surface as input errors of the engine when building physics objects.
fn to_input(e: ConfigError) -> dyncorr::Error {
    dyncorr::Error::InvalidArgument(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = Config::default();
        c.merge_text("# two spins\nlambda = pi/8  # weak\n\nn = 1e5\n").unwrap();
        assert_eq!(c.float("lambda").unwrap(), std::f64::consts::PI / 8.0);
        assert_eq!(c.uint("n").unwrap(), 100_000);
        c.set_pair("n=7").unwrap();
        assert_eq!(c.uint("n").unwrap(), 7);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let mut c = Config::default();
        assert!(matches!(c.merge_text("lamda = 0.1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.merge_text("lambda 0.1"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn default_is_the_two_spin_example() {
        let c = Config::default();
        let sys = c.system().unwrap();
        let q = c.query().unwrap();
        let e = dyncorr::oracle::exact_correlation(&sys, &q).unwrap();
        let pi = std::f64::consts::PI;
        let p = dyncorr::oracle::TwoSpinParams { alpha1: pi / 3.0, alpha2: pi / 3.0, theta1: pi / 7.0, theta2: pi / 5.0, t1: 1.0, t2: 10.0 };
        assert!((e - dyncorr::oracle::closed_form_c_two_spin(&p)).norm() < 1e-12);
    }

    #[test]
    fn term_and_state_syntax() {
        let mut c = Config::default();
        c.merge_text("hamiltonian = terms\nterms = 1 x0 x1; -0.5 z1\nstate = product\namplitudes = 1:0, 0:0; 0.6, 0:0.8").unwrap();
        assert!(c.system().is_ok());
        assert_eq!(c.terms().unwrap()[1].factors, vec![(1, Axis::Z)]);
    }
}
