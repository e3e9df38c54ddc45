//! Machine-readable reports shared by the verification entry points and the
//! CLI. Everything serializes deterministically (struct field order, vectors
//! in canonical order) so identical runs produce byte-identical JSON.

use serde::Serialize;

/// Version tag carried by every JSON document the tooling emits.
pub const SCHEMA: &str = "pgcm/1";

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// Offending object in its literal form.
    pub matrix: String,
    pub detail: String,
}

/// Outcome of an exhaustive orbit-partition check.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub orbit_count: usize,
    /// Orbit sizes ordered by the orbit's lexicographically least member.
    pub orbit_sizes: Vec<usize>,
    pub violations: Vec<Violation>,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total(&self) -> usize {
        self.orbit_sizes.iter().sum()
    }
}

/// One named check inside a composite verification run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct CheckReport {
    pub checks: Vec<CheckLine>,
}

impl CheckReport {
    pub fn push(&mut self, check: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine {
            check: check.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
