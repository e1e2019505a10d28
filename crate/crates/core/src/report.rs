//! Check records and run configuration shared by every report.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::TwistedGroupoid;
use crate::iso::DEFAULT_BUDGET;

pub const TOOL: &str = "cartan";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerance: f64,
    pub seed: u64,
    pub iso_budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tolerance: 1e-9, seed: 42, iso_budget: DEFAULT_BUDGET }
    }
}

/// Echoed at the top of every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub semigroup: String,
    /// SHA-256 of the canonical JSON of the input groupoid and cocycle.
    pub input_sha256: String,
}

impl ReportHeader {
    pub fn new(ctx: &TwistedGroupoid, config: &RunConfig, semigroup: &str) -> Self {
        ReportHeader {
            tool: TOOL.into(),
            version: VERSION.into(),
            config: config.clone(),
            semigroup: semigroup.into(),
            input_sha256: input_hash(ctx),
        }
    }
}

pub fn input_hash(ctx: &TwistedGroupoid) -> String {
    let json = serde_json::to_vec(&ctx.to_tables()).expect("tables serialize");
    hex::encode(Sha256::digest(&json))
}

/// One named property, with the number of cases it ran on, the worst
/// residual seen and the first counterexample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub max_residual: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, threshold: f64) -> Self {
        Check { name: name.into(), passed: true, cases: 0, max_residual: 0.0, threshold, witness: None }
    }

    /// Records a numeric case; fails once the residual exceeds the threshold.
    pub fn residual(&mut self, r: f64, witness: impl FnOnce() -> String) {
        self.cases += 1;
        let r = if r.is_finite() { r } else { f64::MAX };
        self.max_residual = self.max_residual.max(r);
        if r > self.threshold {
            self.fail(witness);
        }
    }

    /// Records a boolean case.
    pub fn truth(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(witness);
        }
    }

    fn fail(&mut self, witness: impl FnOnce() -> String) {
        if self.passed {
            self.witness = Some(witness());
        }
        self.passed = false;
    }

    /// Requires at least `n` cases.
    pub fn require_cases(&mut self, n: usize) {
        if self.cases < n && self.passed {
            self.passed = false;
            self.witness = Some(format!("only {} cases, {n} required", self.cases));
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} (cases {}, max residual {:.3e}){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_residual,
            self.witness.as_ref().map(|w| format!(": {w}")).unwrap_or_default()
        )
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
