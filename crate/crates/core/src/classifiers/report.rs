//! Suite reports: one record per check, printable as JSON lines or a table.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::genmatrix::format_linear;
use crate::orbits::{CanonicalKey, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub suite: String,
    pub check: String,
    pub status: Status,
    pub detail: String,
}

/// A class as it appears in a report.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassSummary {
    pub key: CanonicalKey,
    pub label: String,
    pub generic: String,
}

impl ClassSummary {
    pub fn new(key: CanonicalKey, label: impl Into<String>) -> Self {
        let generic = format_linear(&key.representative());
        ClassSummary {
            key,
            label: label.into(),
            generic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub suite: String,
    pub parameters: String,
    pub checks: Vec<CheckLine>,
    pub computed: Vec<ClassSummary>,
    pub expected: Vec<ClassSummary>,
    pub witnesses: Vec<(String, Witness)>,
    pub elapsed: Duration,
}

impl ClassificationReport {
    pub fn new(suite: &str, parameters: impl Into<String>) -> Self {
        ClassificationReport {
            suite: suite.to_string(),
            parameters: parameters.into(),
            checks: Vec::new(),
            computed: Vec::new(),
            expected: Vec::new(),
            witnesses: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) -> bool {
        self.checks.push(CheckLine {
            suite: self.suite.clone(),
            check: name.into(),
            status: Status::of(ok),
            detail: detail.into(),
        });
        ok
    }

    /// Records a check that could not run because of an error.
    pub fn error(&mut self, name: impl Into<String>, err: impl std::fmt::Display) {
        self.check(name, false, format!("error: {err}"));
    }

    pub fn witness(&mut self, label: impl Into<String>, w: Witness) {
        self.witnesses.push((label.into(), w));
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// JSON lines: one object per check, then one per class and witness.
    pub fn to_json_lines(&self, timings: bool) -> String {
        let mut out = String::new();
        let mut push = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        for c in &self.checks {
            // Struct order, so every check line reads suite, check, status, detail.
            push(serde_json::to_string(c).expect("serializable"));
        }
        for (kind, list) in [("computed", &self.computed), ("expected", &self.expected)] {
            for c in list {
                push(
                    serde_json::json!({
                        "suite": self.suite,
                        "class": kind,
                        "label": c.label,
                        "key": c.key.to_string(),
                        "generic": c.generic,
                    })
                    .to_string(),
                );
            }
        }
        for (label, w) in &self.witnesses {
            push(
                serde_json::json!({
                    "suite": self.suite,
                    "witness": label,
                    "P": w.p.to_string(),
                    "Q": w.q.to_string(),
                })
                .to_string(),
            );
        }
        if timings {
            push(
                serde_json::json!({
                    "suite": self.suite,
                    "check": "wall_time",
                    "status": "pass",
                    "detail": format!("{:.3}s", self.elapsed.as_secs_f64()),
                })
                .to_string(),
            );
        }
        out
    }

    pub fn to_table(&self, timings: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== {} ({}) ==", self.suite, self.parameters);
        let width = self.checks.iter().map(|c| c.check.len()).max().unwrap_or(0);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<4}  {:<width$}  {}",
                c.status.as_str().to_uppercase(),
                c.check,
                c.detail
            );
        }
        if !self.computed.is_empty() {
            let _ = writeln!(out, "  classes:");
            for c in &self.computed {
                let _ = writeln!(out, "    {:<10} {}", c.label, c.generic);
            }
        }
        for (label, w) in &self.witnesses {
            let _ = writeln!(out, "  witness {label}: P={} Q={}", w.p, w.q);
        }
        if timings {
            let _ = writeln!(out, "  wall time {:.3}s", self.elapsed.as_secs_f64());
        }
        let _ = writeln!(out, "  {}", if self.passed() { "PASSED" } else { "FAILED" });
        out
    }
}
