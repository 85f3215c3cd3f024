//! Run configuration: one JSON file plus `--set key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Applies one `key=value` override. Keys: `id`, `output.json`,
    /// `output.csv`, and parameter names (optionally prefixed `params.`).
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        match key {
            "id" => self.id = Some(raw.to_string()),
            "output.json" => self.output.json = Some(PathBuf::from(raw)),
            "output.csv" => self.output.csv = Some(PathBuf::from(raw)),
            _ => {
                let name = key.strip_prefix("params.").unwrap_or(key);
                if name.is_empty() || name.contains('.') {
                    return Err(CliError::Usage(format!("unknown override key `{key}`")));
                }
                self.params.insert(name.to_string(), parse_value(raw));
            }
        }
        Ok(())
    }
}

/// JSON if it parses, then `a..b` (inclusive integer range), then a comma
/// list, else a plain string.
pub fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if let Some(list) = parse_range(raw) {
        return Value::Array(list.into_iter().map(Value::from).collect());
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(parse_value).collect());
    }
    Value::String(raw.to_string())
}

fn parse_range(raw: &str) -> Option<Vec<i64>> {
    let (a, b) = raw.split_once("..")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b): (i64, i64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a <= b && b - a <= 1_000_000).then(|| (a..=b).collect())
}

/// Typed view of the parameter map. Every getter records the value it
/// resolved (default or given), so the report can echo the effective config.
#[derive(Debug)]
pub struct Params {
    given: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Params {
    /// Rejects keys outside `allowed` (plus `seed`).
    pub fn new(given: Map<String, Value>, allowed: &[&str]) -> Result<Self, CliError> {
        if let Some(k) = given.keys().find(|k| k.as_str() != "seed" && !allowed.contains(&k.as_str())) {
            let mut names: Vec<&str> = allowed.to_vec();
            names.push("seed");
            return Err(CliError::Usage(format!("unknown parameter `{k}` (allowed: {})", names.join(", "))));
        }
        Ok(Params {
            given,
            resolved: BTreeMap::new(),
        })
    }

    pub fn echo(&self) -> Value {
        Value::Object(self.resolved.clone().into_iter().collect())
    }

    fn get<T: Serialize>(&mut self, key: &str, default: T, parse: impl Fn(&Value) -> Option<T>) -> Result<T, CliError> {
        let v = match self.given.get(key) {
            None => default,
            Some(raw) => parse(raw).ok_or_else(|| CliError::Usage(format!("parameter `{key}`: cannot use {raw}")))?,
        };
        self.resolved.insert(key.to_string(), serde_json::to_value(&v).expect("plain values serialize"));
        Ok(v)
    }

    pub fn seed(&mut self) -> Result<u64, CliError> {
        self.u64("seed", nucdim::rng::DEFAULT_SEED)
    }

    pub fn u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        self.get(key, default, as_u64)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        self.get(key, default, |v| as_u64(v).and_then(|x| usize::try_from(x).ok()))
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        self.get(key, default, |v| v.as_f64().filter(|x| x.is_finite()))
    }

    pub fn string(&mut self, key: &str, default: &str) -> Result<String, CliError> {
        self.get(key, default.to_string(), |v| v.as_str().map(str::to_string))
    }

    /// Accepts a number, an array, or a string "a..b" / "a,b,c".
    pub fn usize_list(&mut self, key: &str, default: Vec<usize>) -> Result<Vec<usize>, CliError> {
        self.get(key, default, |v| list_of(v, |x| as_u64(x).and_then(|u| usize::try_from(u).ok())))
    }

    pub fn f64_list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        self.get(key, default, |v| list_of(v, |x| x.as_f64().filter(|f| f.is_finite())))
    }

    /// Structured parameter, deserialized from its JSON value.
    pub fn object<T: Serialize + for<'de> Deserialize<'de>>(&mut self, key: &str, default: T) -> Result<T, CliError> {
        self.get(key, default, |v| serde_json::from_value(v.clone()).ok())
    }
}

fn as_u64(v: &Value) -> Option<u64> {
    v.as_u64().or_else(|| v.as_str().and_then(|s| s.trim().parse().ok()))
}

fn list_of<T>(v: &Value, item: impl Fn(&Value) -> Option<T>) -> Option<Vec<T>> {
    match v {
        Value::Array(xs) => xs.iter().map(item).collect(),
        Value::String(s) => match parse_value(s) {
            Value::String(_) => None,
            Value::Array(xs) => xs.iter().map(item).collect(),
            other => item(&other).map(|x| vec![x]),
        },
        other => item(other).map(|x| vec![x]),
    }
}
