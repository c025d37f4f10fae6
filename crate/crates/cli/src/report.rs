//! Structured run reports and the exit-code policy.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{CliError, ExperimentConfig};

/// Outcome of a single check or of a whole run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "REPORT-ONLY")]
    ReportOnly,
    #[serde(rename = "ERROR")]
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ReportOnly => "REPORT-ONLY",
            Status::Error => "ERROR",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::ReportOnly => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<String>,
    pub detail: String,
}

impl Check {
    /// A gating check.
    pub fn gate(
        name: impl Into<String>,
        value: f64,
        threshold: impl Into<String>,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            value: Some(value),
            threshold: Some(threshold.into()),
            detail: String::new(),
        }
    }

    /// A measured quantity that never gates.
    pub fn report(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::ReportOnly,
            value: Some(value),
            threshold: None,
            detail: String::new(),
        }
    }

    pub fn error(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self {
            name: name.into(),
            status: Status::Error,
            value: None,
            threshold: None,
            detail: err.to_string(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Combined status: any error wins, then any failure. Report-only checks
/// never gate.
pub fn overall(checks: &[Check]) -> Status {
    let has = |s: Status| checks.iter().any(|c| c.status == s);
    if has(Status::Error) {
        Status::Error
    } else if has(Status::Fail) {
        Status::Fail
    } else if has(Status::Pass) {
        Status::Pass
    } else {
        Status::ReportOnly
    }
}

pub const THRESHOLD_NOTE: &str =
    "thresholds are engineering choices; the underlying results give no rates";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub code_version: String,
    pub status: Status,
    pub note: String,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    /// Output files relative to the experiment directory.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.into(),
            name: config.name.clone(),
            seed: config.seed,
            config_hash: config.hash(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            status: Status::ReportOnly,
            note: THRESHOLD_NOTE.into(),
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
        self.status = overall(&self.checks);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
        self.status = overall(&self.checks);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(key.into(), v);
    }

    /// Writes `file` under `dir` and records it.
    pub fn write_file(&mut self, dir: &Path, file: &str, contents: &str) -> Result<(), CliError> {
        std::fs::write(dir.join(file), contents)?;
        self.files.push(file.into());
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::write(dir.join("report.json"), self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_ignores_report_only() {
        let pass = Check::gate("a", 1.0, "< 2", true);
        let fail = Check::gate("b", 3.0, "< 2", false);
        let info = Check::report("c", 0.5);
        assert_eq!(overall(std::slice::from_ref(&info)), Status::ReportOnly);
        assert_eq!(overall(&[info.clone(), pass.clone()]), Status::Pass);
        assert_eq!(overall(&[pass.clone(), fail.clone(), info]), Status::Fail);
        assert_eq!(overall(&[fail, Check::error("d", "boom")]), Status::Error);
    }

    #[test]
    fn status_labels_and_codes() {
        assert_eq!(
            serde_json::to_string(&Status::ReportOnly).unwrap(),
            "\"REPORT-ONLY\""
        );
        assert_eq!(Status::Pass.exit_code(), 0);
        assert_eq!(Status::ReportOnly.exit_code(), 0);
        assert_eq!(Status::Fail.exit_code(), 1);
        assert_eq!(Status::Error.exit_code(), 2);
    }

    #[test]
    fn report_round_trips() {
        let cfg = ExperimentConfig::default();
        let mut r = RunReport::new("cones", &cfg);
        r.push(Check::gate("x", 0.0, "= 0", true).with_detail("ok"));
        r.metric("sizes", vec![1, 2, 3]);
        let back: RunReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.status, Status::Pass);
    }
}
