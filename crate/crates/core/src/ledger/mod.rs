//! The contract state machine: key registry, four-way balances, and the
//! deposit / transfer / withdraw / rollover transitions.
//!
//! Every transition validates completely before touching state, so a
//! rejected call leaves [`LedgerState`] unchanged. Incoming transfers land
//! in the receiver's pending half; spends debit the actual half and
//! re-encrypt it to a single self-owned entry.

mod error;
mod prover;
pub mod store;

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{Fq, Point};
use crate::dhenc::{decrypt_balance, DhBalance, DhEntry};
use crate::elgamal::{aggregate, Amount, Commitment};
use crate::encoding::hex_bytes;
use crate::kdf::{EthAddress, KeyPair};
use crate::statements::{
    verify_deposit, verify_transfer, verify_withdraw, DepositProof, TransferProof, WithdrawProof,
};

pub use error::LedgerError;
pub use prover::{build_deposit, build_transfer, build_withdraw};

/// Pending and actual balances, each as a commitment and a DH ciphertext.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AccountBalance {
    pub pending_commitment: Commitment,
    pub actual_commitment: Commitment,
    pub pending_dh: DhBalance,
    pub actual_dh: DhBalance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerState {
    /// Keyed by the x-coordinate of the owner's public key.
    pub accounts: BTreeMap<Fq, AccountBalance>,
    pub registered_keys: BTreeMap<EthAddress, Point>,
    pub total_wrapped: Amount,
    /// Ratcheted on every [`LedgerState::take_rng`] call.
    #[serde(with = "hex_bytes")]
    pub rng_seed: [u8; 32],
}

/// Public effect of an accepted transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDelta {
    pub accounts: BTreeMap<EthAddress, AccountBalance>,
    pub total_wrapped: Amount,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payout: Option<Payout>,
}

/// ETH released by a withdrawal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payout {
    pub receiver: EthAddress,
    pub amount: Amount,
}

impl LedgerState {
    pub fn new(rng_seed: [u8; 32]) -> Self {
        LedgerState {
            accounts: BTreeMap::new(),
            registered_keys: BTreeMap::new(),
            total_wrapped: Amount::ZERO,
            rng_seed,
        }
    }

    /// Seeds the nonce generator from system entropy.
    pub fn with_entropy() -> Self {
        let mut seed = [0u8; 32];
        rand::rngs::OsRng.fill_bytes(&mut seed);
        Self::new(seed)
    }

    /// Hands out a generator for the next batch of protocol nonces and
    /// ratchets the stored seed past it.
    pub fn take_rng(&mut self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.rng_seed);
        rng.fill_bytes(&mut self.rng_seed);
        rng
    }

    pub fn registered_key(&self, addr: &EthAddress) -> Option<Point> {
        self.registered_keys.get(addr).copied()
    }

    /// The balance record for a registered address; unfunded accounts read as zero.
    pub fn balance(&self, addr: &EthAddress) -> Result<AccountBalance, LedgerError> {
        let pk = self.require_key(addr)?;
        Ok(self.accounts.get(&pk.x()).cloned().unwrap_or_default())
    }

    fn require_key(&self, addr: &EthAddress) -> Result<Point, LedgerError> {
        self.registered_key(addr)
            .ok_or(LedgerError::UnknownAccount(*addr))
    }

    fn require_owner(&self, addr: &EthAddress, pk: &Point) -> Result<(), LedgerError> {
        if self.require_key(addr)? == *pk {
            Ok(())
        } else {
            Err(LedgerError::KeyMismatch(*addr))
        }
    }

    fn delta(&self, addrs: &[EthAddress], payout: Option<Payout>) -> StateDelta {
        let accounts = addrs
            .iter()
            .map(|a| (*a, self.balance(a).expect("delta for registered account")))
            .collect();
        StateDelta {
            accounts,
            total_wrapped: self.total_wrapped,
            payout,
        }
    }

    /// Wraps `value` wei. Registers `pk` for `addr` on first use; afterwards
    /// the key is immutable. The proof must open the current actual balance
    /// and re-encrypt the post-deposit total under the owner's key.
    pub fn deposit(
        &mut self,
        addr: EthAddress,
        pk: Point,
        value: Amount,
        proof: &DepositProof,
    ) -> Result<StateDelta, LedgerError> {
        let st = &proof.statement;
        if st.amount != value.value() {
            return Err(LedgerError::AmountMismatch {
                statement: st.amount,
                attached: value,
            });
        }
        if st.pk != pk {
            return Err(LedgerError::KeyMismatch(addr));
        }
        let registering = match self.registered_key(&addr) {
            Some(existing) if existing != pk => return Err(LedgerError::KeyMismatch(addr)),
            Some(_) => false,
            None => {
                if pk.is_identity() || !pk.in_subgroup() {
                    return Err(LedgerError::InvalidKey);
                }
                if self.registered_keys.values().any(|k| k.x() == pk.x()) {
                    return Err(LedgerError::KeyInUse);
                }
                true
            }
        };
        let current = self.accounts.get(&pk.x()).cloned().unwrap_or_default();
        if st.balance_commitment != current.actual_commitment {
            return Err(LedgerError::StaleCommitment);
        }
        let report = verify_deposit(st, &proof.witness);
        if !report.accepted {
            return Err(LedgerError::Rejected(report));
        }
        let total = self
            .total_wrapped
            .checked_add(value)
            .ok_or(LedgerError::Overflow)?;

        if registering {
            self.registered_keys.insert(addr, pk);
        }
        let account = self.accounts.entry(pk.x()).or_default();
        account.actual_commitment = aggregate(&account.actual_commitment, &st.amount_commitment);
        account.actual_dh = DhBalance::reset(st.new_encrypted_balance, pk, st.encryption_nonce);
        self.total_wrapped = total;
        Ok(self.delta(&[addr], None))
    }

    /// Moves a hidden amount from `sender`'s actual balance to `receiver`'s
    /// pending balance. With `auto_rollover`, the sender's pending half is
    /// folded into actual after the debit.
    pub fn transfer(
        &mut self,
        sender: EthAddress,
        receiver: EthAddress,
        proof: &TransferProof,
        auto_rollover: bool,
    ) -> Result<StateDelta, LedgerError> {
        let st = &proof.statement;
        self.require_owner(&sender, &st.sender_pk)?;
        self.require_owner(&receiver, &st.receiver_pk)?;
        if sender == receiver {
            return Err(LedgerError::SelfTransfer);
        }
        let sender_balance = self.balance(&sender)?;
        if st.sender_balance_commitment != sender_balance.actual_commitment {
            return Err(LedgerError::StaleCommitment);
        }
        let report = verify_transfer(st, &proof.witness);
        if !report.accepted {
            return Err(LedgerError::Rejected(report));
        }

        let s = self.accounts.entry(st.sender_pk.x()).or_default();
        s.actual_commitment = aggregate(&s.actual_commitment, &st.sender_amount_commitment);
        s.actual_dh = DhBalance::reset(st.new_sender_encrypted_balance, st.sender_pk, st.sender_nonce);

        let r = self.accounts.entry(st.receiver_pk.x()).or_default();
        r.pending_commitment = aggregate(&r.pending_commitment, &st.receiver_amount_commitment);
        r.pending_dh.credit(
            st.receiver_encrypted_amount,
            DhEntry {
                sender_pk: st.sender_pk,
                nonce: st.receiver_nonce,
            },
        );

        if auto_rollover {
            self.rollover(sender)?;
        }
        Ok(self.delta(&[sender, receiver], None))
    }

    /// Unwraps `statement.amount`, paying it out to `statement.receiver_address`.
    pub fn withdraw(
        &mut self,
        addr: EthAddress,
        proof: &WithdrawProof,
    ) -> Result<StateDelta, LedgerError> {
        let st = &proof.statement;
        self.require_owner(&addr, &st.pk)?;
        let current = self.balance(&addr)?;
        if st.balance_commitment != current.actual_commitment {
            return Err(LedgerError::StaleCommitment);
        }
        let report = verify_withdraw(st, &proof.witness);
        if !report.accepted {
            return Err(LedgerError::Rejected(report));
        }
        // Range was enforced by the verifier.
        let amount = Amount::new(st.amount)?;
        let total = self
            .total_wrapped
            .checked_sub(amount)
            .ok_or(LedgerError::InsufficientReserve {
                amount,
                reserve: self.total_wrapped,
            })?;

        let account = self.accounts.entry(st.pk.x()).or_default();
        account.actual_commitment = aggregate(&account.actual_commitment, &st.amount_commitment);
        account.actual_dh = DhBalance::reset(st.new_encrypted_balance, st.pk, st.encryption_nonce);
        self.total_wrapped = total;
        Ok(self.delta(
            &[addr],
            Some(Payout {
                receiver: st.receiver_address,
                amount,
            }),
        ))
    }

    /// Folds the pending half into the actual half.
    pub fn rollover(&mut self, addr: EthAddress) -> Result<StateDelta, LedgerError> {
        let pk = self.require_key(&addr)?;
        if let Some(account) = self.accounts.get_mut(&pk.x()) {
            if account.pending_commitment != Commitment::IDENTITY || !account.pending_dh.is_empty() {
                account.actual_commitment =
                    aggregate(&account.actual_commitment, &account.pending_commitment);
                account.pending_commitment = Commitment::IDENTITY;
                let pending = std::mem::take(&mut account.pending_dh);
                account.actual_dh.absorb(pending);
            }
        }
        Ok(self.delta(&[addr], None))
    }

    /// Decrypts `(pending, actual)` for the owner of `addr`.
    pub fn decrypt_account(
        &self,
        keypair: &KeyPair,
        addr: &EthAddress,
    ) -> Result<(Amount, Amount), LedgerError> {
        self.require_owner(addr, &keypair.pk)?;
        let account = self.balance(addr)?;
        Ok((
            decrypt_balance(&keypair.sk, &account.pending_dh)?,
            decrypt_balance(&keypair.sk, &account.actual_dh)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elgamal::verify_opening;
    use crate::kdf::{derive_keypair, TestSigner};
    use crate::statements::Violation;

    const CONTRACT: EthAddress = EthAddress::new([0xcc; 20]);

    fn actor(name: &str) -> (EthAddress, KeyPair) {
        let mut addr = [0u8; 20];
        addr[..name.len()].copy_from_slice(name.as_bytes());
        let kp = derive_keypair(&TestSigner::new(name.as_bytes().to_vec()), &CONTRACT).unwrap();
        (EthAddress::new(addr), kp)
    }

    fn amt(v: u128) -> Amount {
        Amount::new(v).unwrap()
    }

    fn deposit(state: &mut LedgerState, who: &(EthAddress, KeyPair), v: u128) {
        let mut rng = state.take_rng();
        let proof = build_deposit(&who.1, state, &who.0, amt(v), &mut rng).unwrap();
        state.deposit(who.0, who.1.pk, amt(v), &proof).unwrap();
    }

    fn transfer(state: &mut LedgerState, from: &(EthAddress, KeyPair), to: &(EthAddress, KeyPair), v: u128) -> Result<StateDelta, LedgerError> {
        let mut rng = state.take_rng();
        let proof = build_transfer(&from.1, state, &from.0, &to.0, amt(v), &mut rng)?;
        state.transfer(from.0, to.0, &proof, false)
    }

    fn assert_consistent(state: &LedgerState, who: &(EthAddress, KeyPair)) {
        let (pending, actual) = state.decrypt_account(&who.1, &who.0).unwrap();
        let bal = state.balance(&who.0).unwrap();
        assert!(verify_opening(&bal.pending_commitment, pending, &who.1.sk));
        assert!(verify_opening(&bal.actual_commitment, actual, &who.1.sk));
    }

    #[test]
    fn fresh_account_is_zero() {
        let mut state = LedgerState::new([1; 32]);
        let alice = actor("alice");
        deposit(&mut state, &alice, 0);
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (Amount::ZERO, Amount::ZERO));
        assert_eq!(state.balance(&alice.0).unwrap().actual_dh.entries.len(), 1);
    }

    #[test]
    fn deposit_transfer_rollover_withdraw() {
        let mut state = LedgerState::new([2; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 100);
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(100)));
        deposit(&mut state, &bob, 0);

        transfer(&mut state, &alice, &bob, 40).unwrap();
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(60)));
        assert_eq!(state.decrypt_account(&bob.1, &bob.0).unwrap(), (amt(40), amt(0)));
        assert_consistent(&state, &alice);
        assert_consistent(&state, &bob);

        state.rollover(bob.0).unwrap();
        assert_eq!(state.decrypt_account(&bob.1, &bob.0).unwrap(), (amt(0), amt(40)));
        let snapshot = state.clone();
        state.rollover(bob.0).unwrap();
        assert_eq!(state, snapshot);
        assert_consistent(&state, &bob);

        let mut rng = state.take_rng();
        let proof = build_withdraw(&alice.1, &state, &alice.0, &alice.0, amt(30), &mut rng).unwrap();
        let delta = state.withdraw(alice.0, &proof).unwrap();
        assert_eq!(delta.payout, Some(Payout { receiver: alice.0, amount: amt(30) }));
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(30)));
        assert_eq!(state.total_wrapped, amt(70));

        let mut rng = state.take_rng();
        let proof = build_withdraw(&alice.1, &state, &alice.0, &alice.0, amt(30), &mut rng).unwrap();
        state.withdraw(alice.0, &proof).unwrap();
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(0)));
        assert_consistent(&state, &alice);
    }

    #[test]
    fn key_is_immutable_after_registration() {
        let mut state = LedgerState::new([3; 32]);
        let alice = actor("alice");
        let mallory = actor("mallory");
        deposit(&mut state, &alice, 5);
        let mut rng = state.take_rng();
        // Honest proof for mallory's key, but submitted for alice's address.
        let mut scratch = LedgerState::new([9; 32]);
        let proof = build_deposit(&mallory.1, &scratch, &mallory.0, amt(1), &mut rng).unwrap();
        let before = state.clone();
        let err = state.deposit(alice.0, mallory.1.pk, amt(1), &proof).unwrap_err();
        assert!(matches!(err, LedgerError::KeyMismatch(_)));
        assert_eq!(state, before);
        scratch.deposit(mallory.0, mallory.1.pk, amt(1), &proof).unwrap();
    }

    #[test]
    fn zero_transfer_adds_entry_only() {
        let mut state = LedgerState::new([4; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 10);
        deposit(&mut state, &bob, 0);
        transfer(&mut state, &alice, &bob, 0).unwrap();
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(10)));
        assert_eq!(state.decrypt_account(&bob.1, &bob.0).unwrap(), (amt(0), amt(0)));
        assert_eq!(state.balance(&bob.0).unwrap().pending_dh.entries.len(), 1);
    }

    #[test]
    fn transfer_to_unregistered_receiver_rejected() {
        let mut state = LedgerState::new([5; 32]);
        let alice = actor("alice");
        let ghost = actor("ghost");
        deposit(&mut state, &alice, 10);
        let err = transfer(&mut state, &alice, &ghost, 1).unwrap_err();
        assert!(matches!(err, LedgerError::UnknownAccount(a) if a == ghost.0));
    }

    #[test]
    fn overspend_is_caught_by_prover_and_verifier() {
        let mut state = LedgerState::new([6; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 10);
        deposit(&mut state, &bob, 0);
        let err = transfer(&mut state, &alice, &bob, 11).unwrap_err();
        assert!(matches!(err, LedgerError::InsufficientBalance { .. }));

        let mut rng = state.take_rng();
        let mut proof = build_withdraw(&alice.1, &state, &alice.0, &alice.0, amt(10), &mut rng).unwrap();
        proof.witness.balance = 5;
        let before = state.clone();
        match state.withdraw(alice.0, &proof).unwrap_err() {
            LedgerError::Rejected(report) => assert!(report.violations.contains(&Violation::W2Overspend)),
            e => panic!("unexpected {e:?}"),
        }
        assert_eq!(state, before);
    }

    #[test]
    fn stale_proof_after_own_rollover_is_rejected() {
        let mut state = LedgerState::new([7; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 50);
        deposit(&mut state, &bob, 50);
        transfer(&mut state, &bob, &alice, 5).unwrap();

        // Alice proves against her actual balance, then rolls over the incoming 5.
        let mut rng = state.take_rng();
        let proof = build_transfer(&alice.1, &state, &alice.0, &bob.0, amt(20), &mut rng).unwrap();
        state.rollover(alice.0).unwrap();
        let before = state.clone();
        let err = state.transfer(alice.0, bob.0, &proof, false).unwrap_err();
        assert!(matches!(err, LedgerError::StaleCommitment));
        assert_eq!(state, before);
    }

    #[test]
    fn incoming_transfer_does_not_invalidate_pending_proof() {
        let mut state = LedgerState::new([8; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 50);
        deposit(&mut state, &bob, 50);
        let mut rng = state.take_rng();
        let proof = build_transfer(&alice.1, &state, &alice.0, &bob.0, amt(20), &mut rng).unwrap();
        transfer(&mut state, &bob, &alice, 5).unwrap();
        state.transfer(alice.0, bob.0, &proof, false).unwrap();
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(5), amt(30)));
    }

    #[test]
    fn auto_rollover_runs_after_debit() {
        let mut state = LedgerState::new([10; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 50);
        deposit(&mut state, &bob, 50);
        transfer(&mut state, &bob, &alice, 7).unwrap();
        let mut rng = state.take_rng();
        let proof = build_transfer(&alice.1, &state, &alice.0, &bob.0, amt(20), &mut rng).unwrap();
        state.transfer(alice.0, bob.0, &proof, true).unwrap();
        assert_eq!(state.decrypt_account(&alice.1, &alice.0).unwrap(), (amt(0), amt(37)));
        assert_consistent(&state, &alice);
    }

    #[test]
    fn self_transfer_rejected() {
        let mut state = LedgerState::new([11; 32]);
        let alice = actor("alice");
        deposit(&mut state, &alice, 50);
        let mut rng = state.take_rng();
        let proof = build_transfer(&alice.1, &state, &alice.0, &alice.0, amt(1), &mut rng).unwrap();
        assert!(matches!(state.transfer(alice.0, alice.0, &proof, false), Err(LedgerError::SelfTransfer)));
    }

    #[test]
    fn deposit_amount_must_match_attached_value() {
        let mut state = LedgerState::new([12; 32]);
        let alice = actor("alice");
        let mut rng = state.take_rng();
        let proof = build_deposit(&alice.1, &state, &alice.0, amt(10), &mut rng).unwrap();
        assert!(matches!(
            state.deposit(alice.0, alice.1.pk, amt(11), &proof),
            Err(LedgerError::AmountMismatch { .. })
        ));
    }

    #[test]
    fn decrypt_with_wrong_keypair_rejected() {
        let mut state = LedgerState::new([13; 32]);
        let alice = actor("alice");
        let bob = actor("bob");
        deposit(&mut state, &alice, 1);
        assert!(matches!(state.decrypt_account(&bob.1, &alice.0), Err(LedgerError::KeyMismatch(_))));
    }

    #[test]
    fn rng_ratchets() {
        let mut state = LedgerState::new([14; 32]);
        let mut a = state.take_rng();
        let mut b = state.take_rng();
        assert_ne!(a.next_u64(), b.next_u64());
        assert_ne!(state.rng_seed, [14; 32]);
    }

    #[test]
    fn state_json_round_trip() {
        let mut state = LedgerState::new([15; 32]);
        let alice = actor("alice");
        deposit(&mut state, &alice, 3);
        let json = serde_json::to_string(&state).unwrap();
        let back: LedgerState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, state);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["total_wrapped"].is_string());
        assert!(v["registered_keys"].is_object());
    }
}
