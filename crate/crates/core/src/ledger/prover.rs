//! Honest statement construction: the client side of each operation.
//!
//! Each builder decrypts the caller's current actual balance, draws fresh
//! nonces from `rng` in a fixed order, and returns a statement the verifier
//! accepts against the state it was built from.

use rand::RngCore;

use crate::curve::{Fl, Fq};
use crate::dhenc::{decrypt_balance, encrypt_amount, encrypt_new_sender_balance};
use crate::elgamal::{commit_amount_receiver, commit_amount_sender, Amount};
use crate::kdf::{EthAddress, KeyPair};
use crate::statements::{
    DepositProof, DepositStatement, DepositWitness, ProofBundle, TransferStatement,
    TransferWitness, TransferProof, WithdrawProof, WithdrawStatement, WithdrawWitness,
};

use super::{AccountBalance, LedgerError, LedgerState};

/// The caller's account and decrypted actual balance. Unregistered
/// addresses read as empty so a first deposit can be built.
fn own_account(
    keypair: &KeyPair,
    state: &LedgerState,
    addr: &EthAddress,
) -> Result<(AccountBalance, Amount), LedgerError> {
    match state.registered_key(addr) {
        Some(pk) if pk != keypair.pk => Err(LedgerError::KeyMismatch(*addr)),
        Some(_) => {
            let account = state.balance(addr)?;
            let actual = decrypt_balance(&keypair.sk, &account.actual_dh)?;
            Ok((account, actual))
        }
        None => Ok((AccountBalance::default(), Amount::ZERO)),
    }
}

pub fn build_deposit<R: RngCore + ?Sized>(
    keypair: &KeyPair,
    state: &LedgerState,
    addr: &EthAddress,
    amount: Amount,
    rng: &mut R,
) -> Result<DepositProof, LedgerError> {
    let (account, prior) = own_account(keypair, state, addr)?;
    let total = prior.checked_add(amount).ok_or(LedgerError::Overflow)?;
    let commitment_nonce = Fl::random(rng);
    let encryption_nonce = Fq::random(rng);
    let statement = DepositStatement {
        pk: keypair.pk,
        amount: amount.value(),
        balance_commitment: account.actual_commitment,
        amount_commitment: commit_amount_receiver(amount, &commitment_nonce, &keypair.pk),
        new_encrypted_balance: encrypt_new_sender_balance(total, Amount::ZERO, &keypair.sk, encryption_nonce)?,
        encryption_nonce,
    };
    Ok(ProofBundle {
        statement,
        witness: DepositWitness {
            sk: keypair.sk,
            prior_balance: prior.value(),
            commitment_nonce,
        },
    })
}

pub fn build_transfer<R: RngCore + ?Sized>(
    keypair: &KeyPair,
    state: &LedgerState,
    sender: &EthAddress,
    receiver: &EthAddress,
    amount: Amount,
    rng: &mut R,
) -> Result<TransferProof, LedgerError> {
    state.require_owner(sender, &keypair.pk)?;
    let receiver_pk = state.require_key(receiver)?;
    let (account, balance) = own_account(keypair, state, sender)?;
    if balance < amount {
        return Err(LedgerError::InsufficientBalance { balance, amount });
    }
    let sender_commit_nonce = Fl::random(rng);
    let receiver_commit_nonce = Fl::random(rng);
    let sender_nonce = Fq::random(rng);
    let receiver_nonce = Fq::random(rng);
    let statement = TransferStatement {
        sender_pk: keypair.pk,
        receiver_pk,
        sender_balance_commitment: account.actual_commitment,
        sender_amount_commitment: commit_amount_sender(amount, &sender_commit_nonce, &keypair.pk),
        receiver_amount_commitment: commit_amount_receiver(amount, &receiver_commit_nonce, &receiver_pk),
        new_sender_encrypted_balance: encrypt_new_sender_balance(balance, amount, &keypair.sk, sender_nonce)?,
        sender_nonce,
        receiver_encrypted_amount: encrypt_amount(amount, &keypair.sk, &receiver_pk, receiver_nonce)?,
        receiver_nonce,
    };
    Ok(ProofBundle {
        statement,
        witness: TransferWitness {
            sk_s: keypair.sk,
            sender_balance: balance.value(),
            amount: amount.value(),
            sender_commit_nonce,
            receiver_commit_nonce,
        },
    })
}

pub fn build_withdraw<R: RngCore + ?Sized>(
    keypair: &KeyPair,
    state: &LedgerState,
    addr: &EthAddress,
    receiver_address: &EthAddress,
    amount: Amount,
    rng: &mut R,
) -> Result<WithdrawProof, LedgerError> {
    state.require_owner(addr, &keypair.pk)?;
    let (account, balance) = own_account(keypair, state, addr)?;
    if balance < amount {
        return Err(LedgerError::InsufficientBalance { balance, amount });
    }
    let commitment_nonce = Fl::random(rng);
    let encryption_nonce = Fq::random(rng);
    let statement = WithdrawStatement {
        pk: keypair.pk,
        receiver_address: *receiver_address,
        amount: amount.value(),
        balance_commitment: account.actual_commitment,
        amount_commitment: commit_amount_sender(amount, &commitment_nonce, &keypair.pk),
        new_encrypted_balance: encrypt_new_sender_balance(balance, amount, &keypair.sk, encryption_nonce)?,
        encryption_nonce,
    };
    Ok(ProofBundle {
        statement,
        witness: WithdrawWitness {
            sk: keypair.sk,
            balance: balance.value(),
            commitment_nonce,
        },
    })
}
