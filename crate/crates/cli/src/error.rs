use cweth_core::LedgerError;
use serde_json::{json, Value};
use thiserror::Error;

use crate::script::ScenarioReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("unknown actor {0:?}; run keygen first")]
    UnknownActor(String),
    #[error("state file {0} already exists")]
    StateExists(String),
    #[error("state file {0} not found; run init first")]
    StateMissing(String),
    #[error("unsupported state file version {0}")]
    Version(u32),
    #[error("invalid script: {0}")]
    Script(String),
    #[error("step {step} ({op}): {source}")]
    Step {
        step: usize,
        op: &'static str,
        #[source]
        source: Box<CliError>,
    },
    #[error("{} of {} assertions failed", .0.assertions.iter().filter(|a| a["pass"] != true).count(), .0.assertions.len())]
    Assertions(Box<ScenarioReport>),
    #[error("{0}")]
    Usage(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Ledger(e) => e.code(),
            CliError::UnknownActor(_) => "UNKNOWN_ACTOR",
            CliError::StateExists(_) => "STATE_EXISTS",
            CliError::StateMissing(_) => "STATE_MISSING",
            CliError::Version(_) => "STATE_VERSION",
            CliError::Script(_) => "INVALID_SCRIPT",
            CliError::Step { source, .. } => source.code(),
            CliError::Assertions(_) => "ASSERTION_FAILED",
            CliError::Usage(_) => "USAGE",
            CliError::Argument(_) => "INVALID_ARGUMENT",
            CliError::Io(_) => "IO",
            CliError::Json(_) => "INVALID_JSON",
        }
    }

    fn root(&self) -> &CliError {
        match self {
            CliError::Step { source, .. } => source.root(),
            other => other,
        }
    }

    /// `{"error": {"code", "message", ["violations"], ["step"]}}`
    pub fn to_json(&self) -> Value {
        let mut err = json!({ "code": self.code(), "message": self.to_string() });
        if let CliError::Ledger(LedgerError::Rejected(report)) = self.root() {
            err["violations"] = json!(report.codes());
        }
        if let CliError::Step { step, .. } = self {
            err["step"] = json!(step);
        }
        if let CliError::Assertions(report) = self {
            err["report"] = json!(report);
        }
        json!({ "error": err })
    }
}
