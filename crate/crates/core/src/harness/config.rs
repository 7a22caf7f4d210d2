use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    TravelTime,
    LogCoefficient,
    InvertEpsilon,
    Asymptote,
    CenterFlow,
    WaveTrain,
    Dispersion,
    DefectContinuation,
    ScalingReport,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::TravelTime,
        Experiment::LogCoefficient,
        Experiment::InvertEpsilon,
        Experiment::Asymptote,
        Experiment::CenterFlow,
        Experiment::WaveTrain,
        Experiment::Dispersion,
        Experiment::DefectContinuation,
        Experiment::ScalingReport,
    ];

    /// File-name stem used for outputs.
    pub fn slug(self) -> &'static str {
        match self {
            Experiment::TravelTime => "travel_time",
            Experiment::LogCoefficient => "log_coefficient",
            Experiment::InvertEpsilon => "invert_epsilon",
            Experiment::Asymptote => "asymptote",
            Experiment::CenterFlow => "center_flow",
            Experiment::WaveTrain => "wave_train",
            Experiment::Dispersion => "dispersion",
            Experiment::DefectContinuation => "defect",
            Experiment::ScalingReport => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            parameters: Map::new(),
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::ConfigInvalid(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Typed access to a parameter map. Every problem is collected so that a bad config
/// reports all offending fields at once; [`Params::finish`] also rejects unknown keys.
pub struct Params<'a> {
    map: &'a Map<String, Value>,
    used: BTreeSet<String>,
    errors: Vec<String>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a Map<String, Value>) -> Self {
        Self { map, used: BTreeSet::new(), errors: Vec::new() }
    }

    fn take(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.map.get(key)
    }

    pub fn error(&mut self, key: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{key}: {msg}"));
    }

    pub fn f64(&mut self, key: &str, default: f64) -> f64 {
        match self.take(key) {
            None => default,
            Some(v) => v.as_f64().unwrap_or_else(|| {
                self.error(key, format!("expected a number, found {v}"));
                default
            }),
        }
    }

    /// A number that must satisfy `ok`; `what` describes the constraint.
    pub fn f64_where(&mut self, key: &str, default: f64, what: &str, ok: impl Fn(f64) -> bool) -> f64 {
        let v = self.f64(key, default);
        if !ok(v) {
            self.error(key, format!("{v} violates {what}"));
        }
        v
    }

    pub fn usize(&mut self, key: &str, default: usize) -> usize {
        match self.take(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(n) => n as usize,
                None => {
                    self.error(key, format!("expected a non-negative integer, found {v}"));
                    default
                }
            },
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        match self.take(key) {
            None => default.to_string(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => {
                self.error(key, format!("expected a string, found {v}"));
                default.to_string()
            }
        }
    }

    pub fn choice(&mut self, key: &str, default: &str, allowed: &[&str]) -> String {
        let s = self.string(key, default);
        if !allowed.contains(&s.as_str()) {
            self.error(key, format!("'{s}' is not one of {allowed:?}"));
        }
        s
    }

    pub fn f64_list(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        match self.take(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => {
                let out: Option<Vec<f64>> = items.iter().map(Value::as_f64).collect();
                out.unwrap_or_else(|| {
                    self.error(key, "expected an array of numbers");
                    default.to_vec()
                })
            }
            Some(v) => {
                self.error(key, format!("expected an array, found {v}"));
                default.to_vec()
            }
        }
    }

    pub fn string_list(&mut self, key: &str, default: &[&str]) -> Vec<String> {
        let fallback = || default.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self.take(key) {
            None => fallback(),
            Some(Value::Array(items)) => {
                let out: Option<Vec<String>> = items.iter().map(|v| v.as_str().map(str::to_string)).collect();
                out.unwrap_or_else(|| {
                    self.error(key, "expected an array of strings");
                    fallback()
                })
            }
            Some(v) => {
                self.error(key, format!("expected an array, found {v}"));
                fallback()
            }
        }
    }

    pub fn optional_string(&mut self, key: &str) -> Option<String> {
        match self.take(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(v) => {
                self.error(key, format!("expected a string, found {v}"));
                None
            }
        }
    }

    pub fn finish(mut self) -> Result<()> {
        for key in self.map.keys() {
            if !self.used.contains(key) {
                self.errors.push(format!("{key}: unknown parameter"));
            }
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(self.errors.join("; ")))
        }
    }
}
