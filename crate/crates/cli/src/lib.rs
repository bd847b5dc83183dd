//! Command-line driver for the cweth-core confidential ledger.
//!
//! State lives in a single JSON file guarded by a `.lock` sibling. Every
//! command prints one JSON object per line; failures print
//! `{"error": {...}}` and exit nonzero.

pub mod chain;
pub mod error;
pub mod ops;
pub mod script;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cweth_core::encoding::hex_u128;
use cweth_core::ledger::store::StateLock;
use cweth_core::Amount;

pub use chain::ChainFile;
pub use error::CliError;
pub use ops::{apply, Op, Submitted};
pub use script::{ScenarioReport, ScenarioScript};

#[derive(Debug, Parser)]
#[command(name = "cweth", version, about = "Confidential wrapped-ETH ledger simulator")]
pub struct Cli {
    /// State file.
    #[arg(long, global = true, default_value = "cweth-state.json")]
    pub state: PathBuf,
    /// Scenario seed, hex. Used by init and run; random when omitted.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Indented output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty state file.
    Init,
    /// Derive an actor's key pair and register it with the contract.
    Keygen { actor: String },
    /// Wrap wei into the actor's actual balance.
    Deposit {
        actor: String,
        #[arg(value_parser = parse_amount)]
        amount: Amount,
        #[command(flatten)]
        proof: ProofArgs,
    },
    /// Send a hidden amount to another actor's pending balance.
    Transfer {
        from: String,
        to: String,
        #[arg(value_parser = parse_amount)]
        amount: Amount,
        /// Fold the sender's pending balance in afterwards.
        #[arg(long)]
        auto_rollover: bool,
        #[command(flatten)]
        proof: ProofArgs,
    },
    /// Unwrap wei from the actor's actual balance to their own address.
    Withdraw {
        actor: String,
        #[arg(value_parser = parse_amount)]
        amount: Amount,
        #[command(flatten)]
        proof: ProofArgs,
    },
    /// Move pending funds into the actual balance.
    Rollover { actor: String },
    /// Print the actor's decrypted pending and actual balances.
    Decrypt { actor: String },
    /// Run a scenario script against a fresh state written to --state.
    Run { script: PathBuf },
}

#[derive(Debug, Clone, clap::Args)]
pub struct ProofArgs {
    /// Print the honest proof bundle instead of submitting it.
    #[arg(long, conflicts_with = "proof")]
    pub dry_run: bool,
    /// Submit this proof bundle (JSON `{statement, witness}`) instead.
    #[arg(long)]
    pub proof: Option<PathBuf>,
}

fn parse_amount(s: &str) -> Result<Amount, String> {
    let v = hex_u128::parse(s)?;
    Amount::new(v).map_err(|e| e.to_string())
}

fn submitted(p: &ProofArgs) -> Result<Submitted, CliError> {
    if p.dry_run {
        return Ok(Submitted::DryRun);
    }
    match &p.proof {
        Some(path) => Ok(Submitted::Proof(serde_json::from_str(&std::fs::read_to_string(path)?)?)),
        None => Ok(Submitted::Honest),
    }
}

fn seed_bytes(seed: &Option<String>) -> Result<Option<Vec<u8>>, CliError> {
    seed.as_deref()
        .map(chain::parse_seed)
        .transpose()
        .map_err(CliError::Argument)
}

fn create(path: &Path, chain: &ChainFile) -> Result<(), CliError> {
    if path.exists() {
        return Err(CliError::StateExists(path.display().to_string()));
    }
    chain.save(path)
}

/// Runs one command and returns the lines to print.
pub fn execute(cli: &Cli) -> Result<Vec<Value>, CliError> {
    let _lock = StateLock::acquire(&cli.state)?;
    let seed = seed_bytes(&cli.seed)?;
    let state = cli.state.display().to_string();

    let (op, submitted) = match &cli.command {
        Command::Init => {
            let seed = seed.unwrap_or_else(|| rand::random::<[u8; 32]>().to_vec());
            let chain = ChainFile::new(&seed);
            create(&cli.state, &chain)?;
            return Ok(vec![json!({
                "op": "init",
                "state": state,
                "seed": format!("0x{}", hex::encode(&seed)),
                "contract_address": chain.contract_address,
                "total_wrapped": chain.ledger.total_wrapped,
            })]);
        }
        Command::Run { script } => {
            let script = ScenarioScript::parse(&std::fs::read_to_string(script)?)?;
            let (chain, report) = script.run(seed.as_deref())?;
            create(&cli.state, &chain)?;
            if !report.passed {
                return Err(CliError::Assertions(Box::new(report)));
            }
            return Ok(vec![serde_json::to_value(report)?]);
        }
        Command::Keygen { actor } => (Op::Keygen { actor: actor.clone() }, Submitted::Honest),
        Command::Deposit { actor, amount, proof } => (
            Op::Deposit { actor: actor.clone(), amount: *amount },
            submitted(proof)?,
        ),
        Command::Transfer { from, to, amount, auto_rollover, proof } => (
            Op::Transfer {
                from: from.clone(),
                to: to.clone(),
                amount: *amount,
                auto_rollover: *auto_rollover,
            },
            submitted(proof)?,
        ),
        Command::Withdraw { actor, amount, proof } => (
            Op::Withdraw { actor: actor.clone(), amount: *amount },
            submitted(proof)?,
        ),
        Command::Rollover { actor } => (Op::Rollover { actor: actor.clone() }, Submitted::Honest),
        Command::Decrypt { actor } => (Op::Decrypt { actor: actor.clone() }, Submitted::Honest),
    };

    let mut chain = ChainFile::load(&cli.state)?;
    if let Some(s) = seed {
        if s != chain.seed {
            return Err(CliError::Argument("--seed does not match the state file".into()));
        }
    }
    let out = apply(&mut chain, &op, &submitted)?;
    let read_only = matches!(submitted, Submitted::DryRun) || matches!(op, Op::Decrypt { .. });
    if !read_only {
        chain.save(&cli.state)?;
    }
    Ok(vec![out])
}
