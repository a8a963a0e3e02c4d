use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::counterexample::Counterexample;

pub const SCHEMA_VERSION: u32 = 1;

/// Witnesses retained per check; the failure count is always complete.
pub const MAX_WITNESSES_PER_CHECK: usize = 20;

/// Pass/fail tally of one named assertion at one aperture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub delta: Option<f64>,
    pub trials: usize,
    pub failures: usize,
    /// Trials where the assertion does not apply, e.g. a constant outside its range.
    pub skipped: usize,
}

/// A measured quantity, maximized over the trials at one aperture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub delta: Option<f64>,
    pub value: f64,
}

/// A failed assertion together with what is needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    pub delta: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub claim: String,
    pub parameters: Value,
    pub trials: usize,
    pub failures: usize,
    pub checks: Vec<CheckSummary>,
    pub constants: Vec<Constant>,
    pub witnesses: Vec<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(claim: impl Into<String>, parameters: Value) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            claim: claim.into(),
            parameters,
            trials: 0,
            failures: 0,
            checks: Vec::new(),
            constants: Vec::new(),
            witnesses: Vec::new(),
            counterexample: None,
            wall_time_s: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Process exit code: 0 when every assertion held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str, delta: Option<f64>) -> Option<&CheckSummary> {
        self.checks
            .iter()
            .find(|c| c.name == name && c.delta == delta)
    }

    pub fn constant(&self, name: &str, delta: Option<f64>) -> Option<f64> {
        self.constants
            .iter()
            .find(|c| c.name == name && c.delta == delta)
            .map(|c| c.value)
    }

    fn check_mut(&mut self, name: &str, delta: Option<f64>) -> &mut CheckSummary {
        let pos = match self
            .checks
            .iter()
            .position(|c| c.name == name && c.delta == delta)
        {
            Some(pos) => pos,
            None => {
                self.checks.push(CheckSummary {
                    name: name.to_string(),
                    delta,
                    trials: 0,
                    failures: 0,
                    skipped: 0,
                });
                self.checks.len() - 1
            }
        };
        &mut self.checks[pos]
    }

    pub fn record_pass(&mut self, name: &str, delta: Option<f64>) {
        self.check_mut(name, delta).trials += 1;
    }

    pub fn record_skip(&mut self, name: &str, delta: Option<f64>) {
        self.check_mut(name, delta).skipped += 1;
    }

    pub fn record_failure(&mut self, witness: Witness) {
        let summary = self.check_mut(&witness.check, witness.delta);
        summary.trials += 1;
        summary.failures += 1;
        let keep = summary.failures <= MAX_WITNESSES_PER_CHECK;
        self.failures += 1;
        if keep {
            self.witnesses.push(witness);
        }
    }

    /// Keeps the maximum of all values recorded under `(name, delta)`.
    pub fn record_max(&mut self, name: &str, delta: Option<f64>, value: f64) {
        match self
            .constants
            .iter_mut()
            .find(|c| c.name == name && c.delta == delta)
        {
            Some(c) => {
                if value > c.value || value.is_nan() {
                    c.value = value;
                }
            }
            None => self.constants.push(Constant {
                name: name.to_string(),
                delta,
                value,
            }),
        }
    }

    /// Append everything from `other` under this report's claim.
    pub fn absorb(&mut self, other: Report) {
        self.trials += other.trials;
        self.failures += other.failures;
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
        self.witnesses.extend(other.witnesses);
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// The JSON form with the wall time zeroed, for determinism comparisons.
    pub fn canonical_json(&self) -> crate::Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        copy.to_json()
    }
}
