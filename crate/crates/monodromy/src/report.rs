//! Verification reports: named checks against pinned tolerances, relation
//! tables and contour metadata, rendered as JSON or as a plain table.

use monodromy_core::functor::{ComparisonReport, QuadratureMeta};
use monodromy_core::repmodel::{RelationReport, RelationStatus};
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    /// `value ≤ tol`; a NaN value fails.
    pub fn at_most(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.to_string(), value, tol, passed: value <= tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationRow {
    pub name: String,
    pub residual: f64,
    pub status: &'static str,
}

pub fn relation_rows(r: &RelationReport) -> Vec<RelationRow> {
    r.entries
        .iter()
        .map(|e| RelationRow {
            name: e.name.clone(),
            residual: e.residual,
            status: match e.status {
                RelationStatus::Checked => "checked",
                RelationStatus::Vacuous => "vacuous",
                RelationStatus::Skipped => "skipped",
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourMetadata {
    pub margin: f64,
    pub largest_radius: f64,
    pub circles: usize,
    pub nodes: usize,
    pub quad_delta: f64,
    pub fit_residual: f64,
    pub taylor_residual: f64,
}

impl From<&QuadratureMeta> for ContourMetadata {
    fn from(m: &QuadratureMeta) -> Self {
        Self {
            margin: m.margin,
            largest_radius: m.largest_radius,
            circles: m.circles,
            nodes: m.nodes,
            quad_delta: m.quad_delta,
            fit_residual: m.fit_residual,
            taylor_residual: m.taylor_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    pub config: Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contour_metadata: Option<ContourMetadata>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            status: Status::Pass,
            failure: None,
            config,
            checks: Vec::new(),
            relations: Vec::new(),
            contour_metadata: None,
            output: None,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn comparison(&mut self, name: &str, c: &ComparisonReport) {
        self.check(Check::at_most(name, c.deviation, c.tol));
    }

    /// Set the status from the checks; a recorded failure stays failed.
    /// The first failing check names the failure.
    pub fn finish(&mut self) {
        if self.failure.is_some() {
            self.status = Status::Fail;
            return;
        }
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => {
                self.status = Status::Fail;
                self.failure = Some(Failure {
                    check: c.name.clone(),
                    message: format!("{} = {:e} exceeds {:e}", c.name, c.value, c.tol),
                });
            }
            None => self.status = Status::Pass,
        }
    }

    pub fn fail(&mut self, check: &str, message: String) {
        self.status = Status::Fail;
        self.failure = Some(Failure { check: check.to_string(), message });
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{} {}", self.command, status);
        if let Some(f) = &self.failure {
            let _ = writeln!(out, "failed check: {} ({})", f.check, f.message);
        }
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(self.relations.iter().map(|r| r.name.len()))
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(out, "{:<width$}  {:>12}  {:>12}  result", "check", "value", "tol");
        for c in &self.checks {
            let r = if c.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{:<width$}  {:>12.3e}  {:>12.3e}  {r}", c.name, c.value, c.tol);
        }
        if !self.relations.is_empty() {
            let _ = writeln!(out, "{:<width$}  {:>12}  status", "relation", "residual");
            for r in &self.relations {
                let _ = writeln!(out, "{:<width$}  {:>12.3e}  {}", r.name, r.residual, r.status);
            }
        }
        if let Some(m) = &self.contour_metadata {
            let _ = writeln!(
                out,
                "contours: {} circles, {} nodes, margin {:.3e}, largest radius {:.3e}",
                m.circles, m.nodes, m.margin, m.largest_radius
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failing_check_names_the_failure() {
        let mut r = Report::new("demo", Value::Null);
        r.check(Check::at_most("small", 1e-12, 1e-8));
        r.check(Check::at_most("large", 1e-3, 1e-8));
        r.check(Check::at_most("nan", f64::NAN, 1e-8));
        r.finish();
        assert!(!r.passed());
        assert_eq!(r.failure.as_ref().unwrap().check, "large");
        assert!(!r.checks[2].passed);
    }

    #[test]
    fn table_lists_every_check() {
        let mut r = Report::new("demo", Value::Null);
        r.check(Check::at_most("fit_residual", 1e-12, 1e-7));
        r.finish();
        let t = r.to_table();
        assert!(t.starts_with("demo PASS"));
        assert!(t.contains("fit_residual"));
    }
}
