use serde::Serialize;
use std::fmt;

/// How many witnesses of each kind a report keeps verbatim. Counts are exact.
const KEEP: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub law: String,
    pub witness: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Skipped => "skipped",
        };
        f.write_str(s)
    }
}

/// Outcome of a validator. Structural problems (dangling ids, missing table
/// entries) are kept apart from law violations, and both apart from instances
/// that could not be decided because the fixture is truncated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub checked: u64,
    pub structural: Vec<Issue>,
    pub structural_count: u64,
    pub violations: Vec<Issue>,
    pub violation_count: u64,
    pub out_of_bound: Vec<Issue>,
    pub out_of_bound_count: u64,
    /// Instances left out because the fixture is size-truncated there. They do
    /// not affect the verdict.
    pub bounded: Vec<Issue>,
    pub bounded_count: u64,
    pub notes: Vec<String>,
    /// Set when a precondition failed and the check was not run.
    pub skipped: Option<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tick(&mut self) {
        self.checked += 1;
    }

    pub fn structural(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.structural_count += 1;
        if self.structural.len() < KEEP {
            self.structural.push(Issue { law: law.into(), witness: witness.into() });
        }
    }

    pub fn fail(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.violation_count += 1;
        if self.violations.len() < KEEP {
            self.violations.push(Issue { law: law.into(), witness: witness.into() });
        }
    }

    pub fn bound(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.out_of_bound_count += 1;
        if self.out_of_bound.len() < KEEP {
            self.out_of_bound.push(Issue { law: law.into(), witness: witness.into() });
        }
    }

    pub fn truncated(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.bounded_count += 1;
        if self.bounded.len() < KEEP {
            self.bounded.push(Issue { law: law.into(), witness: witness.into() });
        }
    }

    pub fn skip(&mut self, why: impl Into<String>) {
        self.skipped = Some(why.into());
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Asserts `ok`, recording a violation otherwise. Returns `ok`.
    pub fn expect(&mut self, ok: bool, law: &str, witness: impl FnOnce() -> String) -> bool {
        self.checked += 1;
        if !ok {
            self.fail(law, witness());
        }
        ok
    }

    pub fn is_ok(&self) -> bool {
        self.structural_count == 0 && self.violation_count == 0
    }

    pub fn is_clean(&self) -> bool {
        self.is_ok() && self.out_of_bound_count == 0
    }

    pub fn verdict(&self) -> Verdict {
        if !self.is_ok() {
            Verdict::Fail
        } else if self.skipped.is_some() {
            Verdict::Skipped
        } else if self.out_of_bound_count > 0 {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.structural_count += other.structural_count;
        self.violation_count += other.violation_count;
        self.out_of_bound_count += other.out_of_bound_count;
        self.bounded_count += other.bounded_count;
        for (dst, src) in [
            (&mut self.structural, other.structural),
            (&mut self.violations, other.violations),
            (&mut self.out_of_bound, other.out_of_bound),
            (&mut self.bounded, other.bounded),
        ] {
            for i in src {
                if dst.len() < KEEP {
                    dst.push(i);
                }
            }
        }
        self.notes.extend(other.notes);
        if self.skipped.is_none() {
            self.skipped = other.skipped;
        }
    }

    /// Every law name that has at least one recorded violation.
    pub fn failed_laws(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .violations
            .iter()
            .chain(self.structural.iter())
            .map(|i| i.law.clone())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn has_failure(&self, law_prefix: &str) -> bool {
        self.violations
            .iter()
            .chain(self.structural.iter())
            .any(|i| i.law.starts_with(law_prefix))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} checked, {} structural, {} violations, {} indeterminate, {} truncated)",
            self.verdict(),
            self.checked,
            self.structural_count,
            self.violation_count,
            self.out_of_bound_count,
            self.bounded_count
        )?;
        for i in self.structural.iter().chain(self.violations.iter()).take(4) {
            write!(f, "\n  {}: {}", i.law, i.witness)?;
        }
        Ok(())
    }
}

/// Returned when an enumeration would be too large to carry out.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize)]
#[error("refused {what}: estimated cost {estimate} exceeds budget {budget}")]
pub struct Refusal {
    pub what: String,
    pub estimate: u128,
    pub budget: u128,
}
