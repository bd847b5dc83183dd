//! Confidential wrapped-ETH balances on babyJubJub.
//!
//! Balances are kept twice: as twisted-ElGamal commitments that the
//! circuits reason about, and as DH-masked field elements the owner can
//! decrypt without a discrete log. [`ledger`] holds the contract state
//! machine that keeps both representations in step; [`statements`] checks
//! the circuit relations for each operation.
//!
//! Not constant time. Do not use with real funds.

pub mod curve;
pub mod dhenc;
pub mod elgamal;
pub mod encoding;
pub mod hashing;
pub mod kdf;
pub mod ledger;
pub mod statements;
#[cfg(any(test, feature = "test-support"))]
pub mod testing;

pub use curve::{Fl, Fq, Point};
pub use elgamal::{Amount, Commitment};
pub use kdf::{EthAddress, KeyPair};
pub use ledger::{LedgerError, LedgerState};
