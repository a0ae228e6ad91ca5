use std::fmt;
use std::time::Duration;

use serde::Serialize;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    /// Human readable target, e.g. `"1/16 (rel 1e-5)"`.
    pub target: String,
    /// Worst-case figure compared against `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Mathematical statement the criterion exercises.
    pub anchor: String,
    /// Supporting numbers, one `key=value` per item.
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub budget: Duration,
}

impl Check {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {:.4e}, target {} ({:.1} s of {:.0} s) {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.target,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64(),
            self.detail,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub threads: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Criteria left out by `--skip`.
    pub skipped: Vec<u8>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// `id,name,seconds,budget` lines.
    pub fn timings(&self) -> String {
        let mut s = String::from("id,name,seconds,budget\n");
        for c in &self.checks {
            s.push_str(&format!("{},{},{:.3},{:.0}\n", c.id, c.name, c.elapsed.as_secs_f64(), c.budget.as_secs_f64()));
        }
        s
    }
}
