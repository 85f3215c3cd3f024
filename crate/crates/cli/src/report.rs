//! Run reports: named criteria with explicit bounds and tolerances.

use serde::Serialize;
use serde_json::{Map, Value};

/// One checked claim. `pass` is decided when the criterion is built; for
/// exact (rational) checks it comes from the exact comparison, with `value`
/// and `bound` given as the nearest doubles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Criterion {
    /// value ≤ bound + tol.
    pub fn le(name: impl Into<String>, value: f64, bound: f64, tol: f64) -> Self {
        Self::with(name, value, bound, tol, value <= bound + tol)
    }

    /// value ≥ bound − tol.
    pub fn ge(name: impl Into<String>, value: f64, bound: f64, tol: f64) -> Self {
        Self::with(name, value, bound, tol, value >= bound - tol)
    }

    /// value < bound (strict, tol 0).
    pub fn lt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::with(name, value, bound, 0.0, value < bound)
    }

    /// |value − target| ≤ tol.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self::with(name, value, target, tol, (value - target).abs() <= tol)
    }

    /// Violation count, which must be zero.
    pub fn count(name: impl Into<String>, violations: usize) -> Self {
        Self::le(name, violations as f64, 0.0, 0.0)
    }

    /// A comparison decided elsewhere (exact arithmetic).
    pub fn exact(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        Self::with(name, value, bound, 0.0, pass)
    }

    fn with(name: impl Into<String>, value: f64, bound: f64, tol: f64, pass: bool) -> Self {
        Criterion {
            name: name.into(),
            value,
            bound,
            tol,
            pass: pass && !value.is_nan(),
        }
    }

    /// One human-readable status line.
    pub fn line(&self) -> String {
        format!(
            "{} {}: value {:e}, bound {:e}, tol {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.bound,
            self.tol
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub id: String,
    pub version: String,
    pub module: String,
    /// Result of the source the experiment checks.
    pub anchor: String,
    pub config: Value,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    pub tables: Map<String, Value>,
    /// Only filled with `--timing`; left null so reruns are byte-identical.
    pub elapsed_ms: Option<u64>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Criterion::le("a", 1.0, 1.0, 0.0).pass);
        assert!(!Criterion::le("a", 1.0 + 1e-9, 1.0, 1e-10).pass);
        assert!(Criterion::ge("a", -1e-11, 0.0, 1e-10).pass);
        assert!(!Criterion::lt("a", 1.0, 1.0).pass);
        assert!(Criterion::near("a", 2.0 + 1e-10, 2.0, 1e-9).pass);
        assert!(!Criterion::near("a", 2.0 / 3.0, 1.0, 1e-9).pass);
        assert!(!Criterion::count("a", 1).pass);
        assert!(!Criterion::le("a", f64::NAN, 1.0, 0.0).pass);
    }

    #[test]
    fn line_names_the_criterion() {
        let l = Criterion::le("defect", 0.5, 0.25, 0.0).line();
        assert!(l.starts_with("FAIL defect:"));
    }
}
