//! Public statements, private witnesses, and a transparent verifier for the
//! deposit, transfer and withdraw circuits.
//!
//! The verifier evaluates every constraint directly on the witness and
//! reports all failures. A SNARK backend can replace it behind the same
//! `verify_*` signatures.
//!
//! Amount-valued signals are carried as raw `u128` so that out-of-range
//! values reach the range constraints instead of failing at parse time.
//! Self-encryption constraints use the witness key `sk·G`, never the
//! statement key; the key constraint alone ties the two together.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::curve::{generator_g, Fl, Fq, Point};
use crate::dhenc::encrypt_value;
use crate::elgamal::{commit_scalar, commit_scalar_sender, opens_to, Commitment, AMOUNT_LIMIT};
use crate::encoding::hex_u128;
use crate::kdf::EthAddress;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepositStatement {
    pub pk: Point,
    #[serde(with = "hex_u128")]
    pub amount: u128,
    pub balance_commitment: Commitment,
    pub amount_commitment: Commitment,
    pub new_encrypted_balance: Fq,
    pub encryption_nonce: Fq,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepositWitness {
    pub sk: Fl,
    #[serde(with = "hex_u128")]
    pub prior_balance: u128,
    pub commitment_nonce: Fl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferStatement {
    pub sender_pk: Point,
    pub receiver_pk: Point,
    pub sender_balance_commitment: Commitment,
    pub sender_amount_commitment: Commitment,
    pub receiver_amount_commitment: Commitment,
    pub new_sender_encrypted_balance: Fq,
    pub sender_nonce: Fq,
    pub receiver_encrypted_amount: Fq,
    pub receiver_nonce: Fq,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferWitness {
    pub sk_s: Fl,
    #[serde(with = "hex_u128")]
    pub sender_balance: u128,
    #[serde(with = "hex_u128")]
    pub amount: u128,
    pub sender_commit_nonce: Fl,
    pub receiver_commit_nonce: Fl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithdrawStatement {
    pub pk: Point,
    pub receiver_address: EthAddress,
    #[serde(with = "hex_u128")]
    pub amount: u128,
    pub balance_commitment: Commitment,
    pub amount_commitment: Commitment,
    pub new_encrypted_balance: Fq,
    pub encryption_nonce: Fq,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithdrawWitness {
    pub sk: Fl,
    #[serde(with = "hex_u128")]
    pub balance: u128,
    pub commitment_nonce: Fl,
}

// Witnesses hold the private key; keep it out of debug output.
macro_rules! redacted_debug {
    ($($ty:ident),*) => {$(
        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_struct(stringify!($ty)).finish_non_exhaustive()
            }
        }
    )*};
}

redacted_debug!(DepositWitness, TransferWitness, WithdrawWitness);

/// Statement plus the witness standing in for its proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofBundle<S, W> {
    pub statement: S,
    pub witness: W,
}

pub type DepositProof = ProofBundle<DepositStatement, DepositWitness>;
pub type TransferProof = ProofBundle<TransferStatement, TransferWitness>;
pub type WithdrawProof = ProofBundle<WithdrawStatement, WithdrawWitness>;

/// A failed constraint. Codes are stable strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    K1KeyMismatch,
    K2BalanceOpening,
    K3AmountCommitment,
    K4BalanceEncryption,
    K5Range,
    T1KeyMismatch,
    T2BalanceOpening,
    T2Overspend,
    T2Range,
    T3SenderCommitment,
    T4ReceiverCommitment,
    T5SenderBalanceEncryption,
    T6ReceiverAmountEncryption,
    W1KeyMismatch,
    W2BalanceOpening,
    W2Overspend,
    W2Range,
    W3AmountCommitment,
    W4BalanceEncryption,
}

impl Violation {
    pub const ALL: [Violation; 19] = [
        Violation::K1KeyMismatch,
        Violation::K2BalanceOpening,
        Violation::K3AmountCommitment,
        Violation::K4BalanceEncryption,
        Violation::K5Range,
        Violation::T1KeyMismatch,
        Violation::T2BalanceOpening,
        Violation::T2Overspend,
        Violation::T2Range,
        Violation::T3SenderCommitment,
        Violation::T4ReceiverCommitment,
        Violation::T5SenderBalanceEncryption,
        Violation::T6ReceiverAmountEncryption,
        Violation::W1KeyMismatch,
        Violation::W2BalanceOpening,
        Violation::W2Overspend,
        Violation::W2Range,
        Violation::W3AmountCommitment,
        Violation::W4BalanceEncryption,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Violation::K1KeyMismatch => "K1_KEY_MISMATCH",
            Violation::K2BalanceOpening => "K2_BALANCE_OPENING",
            Violation::K3AmountCommitment => "K3_AMOUNT_COMMITMENT",
            Violation::K4BalanceEncryption => "K4_BALANCE_ENCRYPTION",
            Violation::K5Range => "K5_RANGE",
            Violation::T1KeyMismatch => "T1_KEY_MISMATCH",
            Violation::T2BalanceOpening => "T2_BALANCE_OPENING",
            Violation::T2Overspend => "T2_OVERSPEND",
            Violation::T2Range => "T2_RANGE",
            Violation::T3SenderCommitment => "T3_SENDER_COMMITMENT",
            Violation::T4ReceiverCommitment => "T4_RECEIVER_COMMITMENT",
            Violation::T5SenderBalanceEncryption => "T5_SENDER_BALANCE_ENCRYPTION",
            Violation::T6ReceiverAmountEncryption => "T6_RECEIVER_AMOUNT_ENCRYPTION",
            Violation::W1KeyMismatch => "W1_KEY_MISMATCH",
            Violation::W2BalanceOpening => "W2_BALANCE_OPENING",
            Violation::W2Overspend => "W2_OVERSPEND",
            Violation::W2Range => "W2_RANGE",
            Violation::W3AmountCommitment => "W3_AMOUNT_COMMITMENT",
            Violation::W4BalanceEncryption => "W4_BALANCE_ENCRYPTION",
        }
    }

    /// The circuit constraint this violation belongs to, e.g. `"T2"`.
    pub fn constraint(&self) -> &'static str {
        &self.code()[..2]
    }

    pub fn from_code(code: &str) -> Option<Violation> {
        Violation::ALL.into_iter().find(|v| v.code() == code)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for Violation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Violation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Violation::from_code(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown violation code {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    fn from_checks(checks: impl IntoIterator<Item = (bool, Violation)>) -> Self {
        let violations: Vec<Violation> = checks
            .into_iter()
            .filter_map(|(ok, v)| (!ok).then_some(v))
            .collect();
        VerificationReport {
            accepted: violations.is_empty(),
            violations,
        }
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.violations.iter().map(Violation::code).collect()
    }
}

fn in_range(v: u128) -> bool {
    v < AMOUNT_LIMIT
}

/// `value + mask(K_self, n)` under the witness key; `false` if the key is degenerate.
fn self_encryption_matches(ciphertext: Fq, value: Fq, sk: &Fl, n: Fq) -> bool {
    let own_pk = generator_g().scalar_mul(sk);
    encrypt_value(value, sk, &own_pk, n).is_ok_and(|ct| ct == ciphertext)
}

fn key_matches(pk: &Point, sk: &Fl) -> bool {
    !sk.is_zero() && generator_g().scalar_mul(sk) == *pk
}

pub fn verify_deposit(st: &DepositStatement, w: &DepositWitness) -> VerificationReport {
    let post_balance = w.prior_balance.checked_add(st.amount);
    let k1 = key_matches(&st.pk, &w.sk);
    let k2 = opens_to(&st.balance_commitment, Fl::from(w.prior_balance), &w.sk);
    let k3 = st.amount_commitment == commit_scalar(Fl::from(st.amount), &w.commitment_nonce, &st.pk);
    let k4 = self_encryption_matches(
        st.new_encrypted_balance,
        Fq::from(w.prior_balance) + Fq::from(st.amount),
        &w.sk,
        st.encryption_nonce,
    );
    let k5 = in_range(st.amount) && in_range(w.prior_balance) && post_balance.is_some_and(in_range);
    VerificationReport::from_checks([
        (k1, Violation::K1KeyMismatch),
        (k2, Violation::K2BalanceOpening),
        (k3, Violation::K3AmountCommitment),
        (k4, Violation::K4BalanceEncryption),
        (k5, Violation::K5Range),
    ])
}

pub fn verify_transfer(st: &TransferStatement, w: &TransferWitness) -> VerificationReport {
    let t1 = key_matches(&st.sender_pk, &w.sk_s);
    let t2_open = opens_to(&st.sender_balance_commitment, Fl::from(w.sender_balance), &w.sk_s);
    let t2_range = in_range(w.sender_balance) && in_range(w.amount);
    let t2_cover = w.sender_balance >= w.amount;
    let t3 = st.sender_amount_commitment
        == commit_scalar_sender(Fl::from(w.amount), &w.sender_commit_nonce, &st.sender_pk);
    let t4 = st.receiver_amount_commitment
        == commit_scalar(Fl::from(w.amount), &w.receiver_commit_nonce, &st.receiver_pk);
    let t5 = self_encryption_matches(
        st.new_sender_encrypted_balance,
        Fq::from(w.sender_balance) - Fq::from(w.amount),
        &w.sk_s,
        st.sender_nonce,
    );
    let t6 = encrypt_value(Fq::from(w.amount), &w.sk_s, &st.receiver_pk, st.receiver_nonce)
        .is_ok_and(|ct| ct == st.receiver_encrypted_amount);
    VerificationReport::from_checks([
        (t1, Violation::T1KeyMismatch),
        (t2_open, Violation::T2BalanceOpening),
        (t2_cover, Violation::T2Overspend),
        (t2_range, Violation::T2Range),
        (t3, Violation::T3SenderCommitment),
        (t4, Violation::T4ReceiverCommitment),
        (t5, Violation::T5SenderBalanceEncryption),
        (t6, Violation::T6ReceiverAmountEncryption),
    ])
}

/// `receiver_address` is bound by statement membership only; no constraint reads it.
pub fn verify_withdraw(st: &WithdrawStatement, w: &WithdrawWitness) -> VerificationReport {
    let w1 = key_matches(&st.pk, &w.sk);
    let w2_open = opens_to(&st.balance_commitment, Fl::from(w.balance), &w.sk);
    let w2_range = in_range(w.balance) && in_range(st.amount);
    let w2_cover = w.balance >= st.amount;
    let w3 = st.amount_commitment
        == commit_scalar_sender(Fl::from(st.amount), &w.commitment_nonce, &st.pk);
    let w4 = self_encryption_matches(
        st.new_encrypted_balance,
        Fq::from(w.balance) - Fq::from(st.amount),
        &w.sk,
        st.encryption_nonce,
    );
    VerificationReport::from_checks([
        (w1, Violation::W1KeyMismatch),
        (w2_open, Violation::W2BalanceOpening),
        (w2_cover, Violation::W2Overspend),
        (w2_range, Violation::W2Range),
        (w3, Violation::W3AmountCommitment),
        (w4, Violation::W4BalanceEncryption),
    ])
}
