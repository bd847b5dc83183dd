//! Scenario scripts: an ordered list of operations run against a fresh state.
//!
//! ```json
//! {"seed": "0x01", "steps": [
//!   {"op": "keygen", "actor": "alice"},
//!   {"op": "deposit", "actor": "alice", "amount": 100},
//!   {"op": "assert-balance", "actor": "alice", "pending": 0, "actual": 100}
//! ]}
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::{parse_seed, ChainFile};
use crate::error::CliError;
use crate::ops::{apply, Op, Submitted};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    /// Hex. Absent means the empty seed.
    #[serde(default)]
    pub seed: Option<String>,
    #[serde(default)]
    pub steps: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub seed: String,
    pub steps: usize,
    pub assertions: Vec<Value>,
    pub passed: bool,
}

impl ScenarioScript {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let script: ScenarioScript =
            serde_json::from_str(text).map_err(|e| CliError::Script(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }

    /// Every actor must be introduced by a keygen step before use.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut known = BTreeSet::new();
        for (i, op) in self.steps.iter().enumerate() {
            if let Op::Keygen { actor } = op {
                known.insert(actor.as_str());
                continue;
            }
            if let Some(name) = op.actors().into_iter().find(|n| !known.contains(n)) {
                return Err(CliError::Script(format!(
                    "step {i} ({}) uses actor {name:?} before keygen",
                    op.name()
                )));
            }
        }
        Ok(())
    }

    /// Runs every step against a fresh state seeded with `seed_override`
    /// or the script's own seed.
    pub fn run(&self, seed_override: Option<&[u8]>) -> Result<(ChainFile, ScenarioReport), CliError> {
        let seed = match (seed_override, &self.seed) {
            (Some(s), _) => s.to_vec(),
            (None, Some(s)) => parse_seed(s).map_err(CliError::Script)?,
            (None, None) => Vec::new(),
        };
        let mut chain = ChainFile::new(&seed);
        let mut assertions = Vec::new();
        for (step, op) in self.steps.iter().enumerate() {
            let out = apply(&mut chain, op, &Submitted::Honest).map_err(|e| CliError::Step {
                step,
                op: op.name(),
                source: Box::new(e),
            })?;
            if matches!(op, Op::AssertBalance { .. }) {
                let mut a = out;
                a["step"] = step.into();
                assertions.push(a);
            }
        }
        let passed = assertions.iter().all(|a| a["pass"] == Value::Bool(true));
        let report = ScenarioReport {
            seed: format!("0x{}", hex::encode(&seed)),
            steps: self.steps.len(),
            assertions,
            passed,
        };
        Ok((chain, report))
    }
}
