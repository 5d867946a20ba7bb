//! Verification reports and CSV formatting.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

/// A number with 17 significant digits, which round-trips any f64.
pub fn csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationCase {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub phase: Option<Complex64>,
    pub pass: bool,
}

impl VerificationCase {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        VerificationCase {
            name: name.into(),
            residual,
            tolerance,
            phase: None,
            // NaN residuals fail
            pass: residual <= tolerance,
        }
    }

    pub fn with_phase(mut self, phase: Complex64) -> Self {
        self.phase = Some(phase);
        self
    }

    /// A case that could not be evaluated.
    pub fn failed(name: impl Into<String>, tolerance: f64) -> Self {
        Self::new(name, f64::INFINITY, tolerance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: Vec<VerificationCase>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, cases: Vec<VerificationCase>) -> Self {
        let passed = cases.iter().filter(|c| c.pass).count();
        VerificationReport {
            suite: suite.into(),
            summary: Summary {
                total: cases.len(),
                passed,
                failed: cases.len() - passed,
            },
            cases,
        }
    }

    pub fn merge(suite: impl Into<String>, parts: Vec<VerificationReport>) -> Self {
        Self::new(suite, parts.into_iter().flat_map(|r| r.cases).collect())
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Worst `residual / tolerance` ratio over all cases.
    pub fn worst_ratio(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.residual / c.tolerance)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for c in &self.cases {
            write!(
                f,
                "{} {:<40} residual {:.3e} tol {:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            )?;
            if let Some(p) = c.phase {
                write!(f, " phase {:+.6}{:+.6}i", p.re, p.im)?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "{} passed, {} failed, {} total",
            self.summary.passed, self.summary.failed, self.summary.total
        )
    }
}
