//! Check rows shared by experiments and the acceptance suite.

use serde::Serialize;

/// One verdict row. The pass flag is a pure function of the other fields:
/// with an oracle present, `|estimate − oracle| ≤ tolerance`; without one,
/// the one-sided bound `estimate ≤ tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub oracle: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Two-sided check against an oracle value.
    pub fn against_oracle(
        name: impl Into<String>,
        estimate: f64,
        stderr: Option<f64>,
        oracle: f64,
        tolerance: f64,
    ) -> Self {
        let pass = (estimate - oracle).abs() <= tolerance;
        CheckRow {
            name: name.into(),
            estimate,
            stderr,
            oracle: Some(oracle),
            tolerance,
            pass,
        }
    }

    /// One-sided bound `estimate ≤ tolerance`.
    pub fn bound(
        name: impl Into<String>,
        estimate: f64,
        stderr: Option<f64>,
        tolerance: f64,
    ) -> Self {
        CheckRow {
            name: name.into(),
            estimate,
            stderr,
            oracle: None,
            tolerance,
            pass: estimate <= tolerance,
        }
    }

    /// Informational row (probes with no pass/fail semantics).
    pub fn info(name: impl Into<String>, estimate: f64, stderr: Option<f64>) -> Self {
        CheckRow {
            name: name.into(),
            estimate,
            stderr,
            oracle: None,
            tolerance: f64::INFINITY,
            pass: true,
        }
    }

    /// Recompute the pass flag from the row's own numbers.
    pub fn recompute_pass(&self) -> bool {
        match self.oracle {
            Some(o) => (self.estimate - o).abs() <= self.tolerance,
            None => self.estimate <= self.tolerance,
        }
    }
}
