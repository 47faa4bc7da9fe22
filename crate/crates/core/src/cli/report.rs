use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::jobs::{execute, Certificate, Job, Verdict};
use super::problem::{sha256_hex, ProblemFile};
use crate::error::{Error, Result};

/// Relative tolerance for re-derived numbers when none is given.
pub const REPLAY_TOL: f64 = 1e-9;

pub const TOOL: &str = env!("CARGO_PKG_NAME");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub job: Job,
    pub problem: ProblemFile,
    pub inputs_digest: String,
    pub verdict: Verdict,
    pub results: Value,
    pub results_digest: String,
    pub certificates: Vec<Certificate>,
    pub tolerance: f64,
    pub timings: Timings,
}

pub fn value_digest(v: &Value) -> String {
    sha256_hex(serde_json::to_string(v).expect("value serializes").as_bytes())
}

impl ReportFile {
    pub fn create(job: Job, problem: ProblemFile, tolerance: f64) -> Result<Self> {
        let start = Instant::now();
        let out = execute(&job, &problem)?;
        Ok(Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs_digest: problem.digest(),
            results_digest: value_digest(&out.results),
            job,
            problem,
            verdict: out.verdict,
            results: out.results,
            certificates: out.certificates,
            tolerance,
            timings: Timings { wall_seconds: start.elapsed().as_secs_f64(), level_seconds: out.level_seconds },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

/// First place where `a` and `b` differ beyond the relative tolerance.
pub fn first_difference(a: &Value, b: &Value, tol: f64, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            let scale = 1f64.max(x.abs()).max(y.abs());
            ((x - y).abs() > tol * scale).then(|| format!("{path}: {x} against {y}"))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{path}: length {} against {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(i, (u, v))| first_difference(u, v, tol, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Some(format!("{path}: different keys"));
            }
            x.iter().find_map(|(k, u)| first_difference(u, &y[k], tol, &format!("{path}.{k}")))
        }
        _ => (a != b).then(|| format!("{path}: {a} against {b}")),
    }
}

/// Replays a report: digests, every certificate, and a fresh run compared within the tolerance.
pub fn verify(report: &ReportFile) -> Vec<Check> {
    let mut checks = vec![
        check("tool", report.tool == TOOL, report.tool.clone()),
        check("inputs_digest", report.inputs_digest == report.problem.digest(), report.inputs_digest.clone()),
        check("results_digest", report.results_digest == value_digest(&report.results), report.results_digest.clone()),
    ];
    for (i, c) in report.certificates.iter().enumerate() {
        let (pass, detail) = match c.replay() {
            Ok(true) => (true, "replayed".to_string()),
            Ok(false) => (false, "replay disagrees".to_string()),
            Err(e) => (false, e.to_string()),
        };
        checks.push(check(format!("certificate[{i}]"), pass, detail));
    }
    match execute(&report.job, &report.problem) {
        Ok(fresh) => {
            let diff = first_difference(&report.results, &fresh.results, report.tolerance, "results");
            checks.push(check("rerun.results", diff.is_none(), diff.unwrap_or_else(|| "agree".into())));
            checks.push(check("rerun.certificates", fresh.certificates == report.certificates, format!("{} certificates", fresh.certificates.len())));
            checks.push(check("rerun.verdict", fresh.verdict == report.verdict, format!("{:?}", fresh.verdict)));
        }
        Err(e) => checks.push(check("rerun", false, e.to_string())),
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn numeric_comparison_is_relative() {
        assert!(first_difference(&json!({"a": [1.0, 2.0]}), &json!({"a": [1.0, 2.0 + 1e-12]}), 1e-9, "r").is_none());
        assert_eq!(first_difference(&json!({"a": [1.0, 2.0]}), &json!({"a": [1.0, 2.5]}), 1e-9, "r").unwrap(), "r.a[1]: 2 against 2.5");
        assert!(first_difference(&json!({"a": "x"}), &json!({"b": "x"}), 1e-9, "r").is_some());
        assert!(first_difference(&json!(null), &json!(null), 1e-9, "r").is_none());
    }
}
