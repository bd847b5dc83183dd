//! Ledger operations shared by single commands and scripts. Each returns
//! the JSON object printed for it.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cweth_core::ledger::{build_deposit, build_transfer, build_withdraw};
use cweth_core::statements::{DepositProof, TransferProof, VerificationReport, WithdrawProof};
use cweth_core::Amount;

use crate::chain::ChainFile;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Op {
    Keygen {
        actor: String,
    },
    Deposit {
        actor: String,
        amount: Amount,
    },
    Transfer {
        from: String,
        to: String,
        amount: Amount,
        #[serde(default)]
        auto_rollover: bool,
    },
    Withdraw {
        actor: String,
        amount: Amount,
    },
    Rollover {
        actor: String,
    },
    Decrypt {
        actor: String,
    },
    AssertBalance {
        actor: String,
        pending: Amount,
        actual: Amount,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Keygen { .. } => "keygen",
            Op::Deposit { .. } => "deposit",
            Op::Transfer { .. } => "transfer",
            Op::Withdraw { .. } => "withdraw",
            Op::Rollover { .. } => "rollover",
            Op::Decrypt { .. } => "decrypt",
            Op::AssertBalance { .. } => "assert-balance",
        }
    }

    /// Actor names the operation refers to; the first is the initiator.
    pub fn actors(&self) -> Vec<&str> {
        match self {
            Op::Transfer { from, to, .. } => vec![from, to],
            Op::Keygen { actor }
            | Op::Deposit { actor, .. }
            | Op::Withdraw { actor, .. }
            | Op::Rollover { actor }
            | Op::Decrypt { actor }
            | Op::AssertBalance { actor, .. } => vec![actor],
        }
    }
}

/// A caller-supplied proof replacing the honest one.
#[derive(Debug, Clone)]
pub enum Submitted {
    Honest,
    /// Build the proof, print it, do not apply.
    DryRun,
    Proof(Value),
}

fn accepted() -> Value {
    json!(VerificationReport {
        accepted: true,
        violations: vec![]
    })
}

fn proof_or<T, F>(submitted: &Submitted, build: F) -> Result<T, CliError>
where
    T: serde::de::DeserializeOwned,
    F: FnOnce() -> Result<T, CliError>,
{
    match submitted {
        Submitted::Proof(v) => Ok(serde_json::from_value(v.clone())?),
        _ => build(),
    }
}

/// Applies `op` to `chain`. With [`Submitted::DryRun`] the chain may have
/// its nonce seed advanced but must not be saved.
pub fn apply(chain: &mut ChainFile, op: &Op, submitted: &Submitted) -> Result<Value, CliError> {
    let dry = matches!(submitted, Submitted::DryRun);
    match op {
        Op::Keygen { actor } => {
            let a = chain.derive_actor(actor)?;
            chain.actors.insert(actor.clone(), a.address);
            let mut out = json!({
                "op": "keygen",
                "actor": actor,
                "address": a.address,
                "public_key": a.keypair.pk,
            });
            // The contract learns a key on the first deposit; register with
            // a zero-wei one so the actor can receive straight away.
            if chain.ledger.registered_key(&a.address).is_none() {
                let mut rng = chain.ledger.take_rng();
                let proof = build_deposit(&a.keypair, &chain.ledger, &a.address, Amount::ZERO, &mut rng)?;
                let delta = chain.ledger.deposit(a.address, a.keypair.pk, Amount::ZERO, &proof)?;
                out["registration"] = json!({
                    "statement": proof.statement,
                    "verification": accepted(),
                    "delta": delta,
                });
            }
            Ok(out)
        }
        Op::Deposit { actor, amount } => {
            let a = chain.actor(actor)?;
            let proof: DepositProof = proof_or(submitted, || {
                let mut rng = chain.ledger.take_rng();
                Ok(build_deposit(&a.keypair, &chain.ledger, &a.address, *amount, &mut rng)?)
            })?;
            if dry {
                return Ok(json!({ "op": "deposit", "dry_run": true, "proof": proof }));
            }
            let delta = chain.ledger.deposit(a.address, a.keypair.pk, *amount, &proof)?;
            Ok(json!({
                "op": "deposit",
                "actor": actor,
                "statement": proof.statement,
                "verification": accepted(),
                "delta": delta,
            }))
        }
        Op::Transfer { from, to, amount, auto_rollover } => {
            let (s, r) = (chain.actor(from)?, chain.actor(to)?);
            let proof: TransferProof = proof_or(submitted, || {
                let mut rng = chain.ledger.take_rng();
                Ok(build_transfer(&s.keypair, &chain.ledger, &s.address, &r.address, *amount, &mut rng)?)
            })?;
            if dry {
                return Ok(json!({ "op": "transfer", "dry_run": true, "proof": proof }));
            }
            let delta = chain.ledger.transfer(s.address, r.address, &proof, *auto_rollover)?;
            Ok(json!({
                "op": "transfer",
                "from": from,
                "to": to,
                "statement": proof.statement,
                "verification": accepted(),
                "delta": delta,
            }))
        }
        Op::Withdraw { actor, amount } => {
            let a = chain.actor(actor)?;
            let proof: WithdrawProof = proof_or(submitted, || {
                let mut rng = chain.ledger.take_rng();
                Ok(build_withdraw(&a.keypair, &chain.ledger, &a.address, &a.address, *amount, &mut rng)?)
            })?;
            if dry {
                return Ok(json!({ "op": "withdraw", "dry_run": true, "proof": proof }));
            }
            let delta = chain.ledger.withdraw(a.address, &proof)?;
            Ok(json!({
                "op": "withdraw",
                "actor": actor,
                "statement": proof.statement,
                "verification": accepted(),
                "delta": delta,
            }))
        }
        Op::Rollover { actor } => {
            let a = chain.actor(actor)?;
            let delta = chain.ledger.rollover(a.address)?;
            Ok(json!({ "op": "rollover", "actor": actor, "delta": delta }))
        }
        Op::Decrypt { actor } => {
            let a = chain.actor(actor)?;
            let (pending, actual) = chain.ledger.decrypt_account(&a.keypair, &a.address)?;
            Ok(json!({ "op": "decrypt", "actor": actor, "pending": pending, "actual": actual }))
        }
        Op::AssertBalance { actor, pending, actual } => {
            let a = chain.actor(actor)?;
            let (p, q) = chain.ledger.decrypt_account(&a.keypair, &a.address)?;
            Ok(json!({
                "op": "assert-balance",
                "actor": actor,
                "expected": { "pending": pending, "actual": actual },
                "found": { "pending": p, "actual": q },
                "pass": (p, q) == (*pending, *actual),
            }))
        }
    }
}
