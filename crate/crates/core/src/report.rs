//! Verification reports: named residual checks with a shared tolerance.
//!
//! A check passes when residual ≤ tol·max(1, scale). Reports render to
//! stable, deterministic text (fixed ordering, fixed formatting) so that
//! repeated runs produce byte-identical output.

use serde::{Deserialize, Serialize};

use crate::linalg::passes;

/// A single named residual check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

/// An ordered list of checks under one tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>, tol: f64) -> Self {
        VerificationReport { title: title.into(), tol, checks: Vec::new() }
    }

    /// Record a residual check; passes when residual ≤ tol·max(1, scale).
    pub fn push(&mut self, name: impl Into<String>, residual: f64, scale: f64) {
        let pass = passes(residual, scale, self.tol);
        self.checks.push(Check { name: name.into(), residual, scale, pass });
    }

    /// Record a boolean check (rendered as residual 0 or 1).
    pub fn push_flag(&mut self, name: impl Into<String>, pass: bool) {
        let residual = if pass { 0.0 } else { 1.0 };
        self.checks.push(Check { name: name.into(), residual, scale: 1.0, pass });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The check with the largest normalized residual, if any.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().max_by(|a, b| {
            let ra = a.residual / 1.0f64.max(a.scale);
            let rb = b.residual / 1.0f64.max(b.scale);
            ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Append all checks of another report, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: &VerificationReport) {
        for c in &other.checks {
            self.checks.push(Check {
                name: format!("{prefix}{}", c.name),
                residual: c.residual,
                scale: c.scale,
                pass: c.pass,
            });
        }
    }

    /// Deterministic text rendering, one line per check.
    pub fn render(&self) -> String {
        let mut out = format!("{} (tol {:.1e})\n", self.title, self.tol);
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<52} residual {:.3e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual
            ));
        }
        out.push_str(&format!(
            "  => {}\n",
            if self.passed() { "ALL CHECKS PASSED" } else { "FAILURES PRESENT" }
        ));
        out
    }
}
