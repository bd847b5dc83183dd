use thiserror::Error;

use crate::dhenc::DhError;
use crate::elgamal::{Amount, AmountOutOfRange};
use crate::kdf::{EthAddress, KdfError};
use crate::statements::VerificationReport;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("address {0} has no registered key")]
    UnknownAccount(EthAddress),
    #[error("public key does not match the key registered for {0}")]
    KeyMismatch(EthAddress),
    #[error("public key is not a valid subgroup point")]
    InvalidKey,
    #[error("public key x-coordinate already belongs to another address")]
    KeyInUse,
    #[error("statement amount {statement} differs from the attached value {attached}")]
    AmountMismatch { statement: u128, attached: Amount },
    #[error("statement was proven against a balance commitment that is no longer current")]
    StaleCommitment,
    #[error("sender and receiver are the same account")]
    SelfTransfer,
    #[error("proof rejected: {}", .0.codes().join(", "))]
    Rejected(VerificationReport),
    #[error("total wrapped supply would leave the amount range")]
    Overflow,
    #[error("withdrawal of {amount} exceeds the wrapped reserve {reserve}")]
    InsufficientReserve { amount: Amount, reserve: Amount },
    #[error("balance {balance} is insufficient for {amount}")]
    InsufficientBalance { balance: Amount, amount: Amount },
    #[error(transparent)]
    Dh(#[from] DhError),
    #[error(transparent)]
    Kdf(#[from] KdfError),
    #[error(transparent)]
    Amount(#[from] AmountOutOfRange),
    #[error("state file is locked by another process: {0}")]
    Locked(String),
    #[error("state file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("state file encoding: {0}")]
    Encoding(#[from] serde_json::Error),
}

impl LedgerError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::UnknownAccount(_) => "UNKNOWN_ACCOUNT",
            LedgerError::KeyMismatch(_) => "KEY_MISMATCH",
            LedgerError::InvalidKey => "INVALID_KEY",
            LedgerError::KeyInUse => "KEY_IN_USE",
            LedgerError::AmountMismatch { .. } => "AMOUNT_MISMATCH",
            LedgerError::StaleCommitment => "STALE_COMMITMENT",
            LedgerError::SelfTransfer => "SELF_TRANSFER",
            LedgerError::Rejected(_) => "PROOF_REJECTED",
            LedgerError::Overflow => "SUPPLY_OVERFLOW",
            LedgerError::InsufficientReserve { .. } => "INSUFFICIENT_RESERVE",
            LedgerError::InsufficientBalance { .. } => "INSUFFICIENT_BALANCE",
            LedgerError::Dh(DhError::Corrupt) => "CORRUPT_BALANCE",
            LedgerError::Dh(_) => "DH_ERROR",
            LedgerError::Kdf(_) => "KDF_ERROR",
            LedgerError::Amount(_) => "AMOUNT_OUT_OF_RANGE",
            LedgerError::Locked(_) => "STATE_LOCKED",
            LedgerError::Io(_) => "STATE_IO",
            LedgerError::Encoding(_) => "STATE_ENCODING",
        }
    }
}
