//! Deterministic JSON reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub anchor: String,
    pub status: Status,
    pub witness: Value,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub status: Status,
    pub checks: Vec<CheckRecord>,
    pub outputs: BTreeMap<String, Value>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Outcome of one check body.
pub struct Outcome {
    pub status: Status,
    pub witness: Value,
}

impl Outcome {
    pub fn new(pass: bool, witness: impl Serialize) -> Result<Self> {
        Ok(Outcome { status: Status::from_pass(pass), witness: serde_json::to_value(witness)? })
    }

    pub fn skipped(reason: &str) -> Result<Self> {
        Ok(Outcome { status: Status::Skipped, witness: json!({ "reason": reason }) })
    }
}

/// Collects check records; non-config errors become failing records.
pub struct Recorder {
    timings: bool,
    checks: Vec<CheckRecord>,
    outputs: BTreeMap<String, Value>,
}

impl Recorder {
    pub fn new(timings: bool) -> Self {
        Recorder { timings, checks: Vec::new(), outputs: BTreeMap::new() }
    }

    pub fn record(&mut self, check: &str, anchor: &str, body: impl FnOnce() -> Result<Outcome>) -> Result<()> {
        let start = Instant::now();
        let out = body();
        let elapsed = start.elapsed().as_millis() as u64;
        self.push(check, anchor, out, elapsed)
    }

    pub fn push(&mut self, check: &str, anchor: &str, out: Result<Outcome>, elapsed: u64) -> Result<()> {
        let (status, witness) = match out {
            Ok(o) => (o.status, o.witness),
            Err(e @ CliError::Config(_)) => return Err(e),
            Err(e) => (Status::Fail, json!({ "error": e.to_string() })),
        };
        let elapsed_ms = self.timings.then_some(elapsed);
        self.checks.push(CheckRecord { check: check.to_string(), anchor: anchor.to_string(), status, witness, elapsed_ms });
        Ok(())
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.outputs.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn finish(mut self, config: &RunConfig) -> Report {
        self.checks.sort_by(|a, b| a.check.cmp(&b.check));
        let status = if self.checks.iter().any(|c| c.status == Status::Fail) { Status::Fail } else { Status::Pass };
        Report { command: config.command.to_string(), config: config.clone(), status, checks: self.checks, outputs: self.outputs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn sorted_and_aggregated() {
        let cfg = RunConfig::new(Command::Verlinde);
        let mut r = Recorder::new(false);
        r.record("b", "x", || Outcome::new(true, 1)).unwrap();
        r.record("a", "x", || Outcome::skipped("n/a")).unwrap();
        let rep = r.finish(&cfg);
        assert_eq!(rep.checks[0].check, "a");
        assert_eq!(rep.status, Status::Pass);
        assert!(rep.to_json().contains("\"elapsed_ms\": null"));

        let mut r = Recorder::new(true);
        r.record("c", "x", || Err(mulkern::Error::DivisionByZero.into())).unwrap();
        let rep = r.finish(&cfg);
        assert_eq!(rep.status, Status::Fail);
        assert!(rep.checks[0].elapsed_ms.is_some());
        assert!(Recorder::new(false).record("d", "x", || Err(CliError::Config("bad".into()))).is_err());
    }
}
