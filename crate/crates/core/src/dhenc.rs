//! Additive balance encryption under Diffie-Hellman shared keys.
//!
//! An amount sent from `s` to `r` is masked as
//! `A = a + K_x + poseidon(K_x, n) mod q` where `K_x` is the x-coordinate
//! of `sk_s·P_r = sk_r·P_s`. Ciphertexts add up; the owner strips one mask
//! per `(sender key, nonce)` entry to recover the plaintext sum. Spending
//! re-encrypts the remaining balance under the owner's own key so the entry
//! list collapses to a single element.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{generator_g, Fl, Fq, Point};
use crate::elgamal::{Amount, AMOUNT_LIMIT};
use crate::hashing::poseidon2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DhError {
    #[error("degenerate key: zero scalar or identity point")]
    DegenerateKey,
    #[error("overspend: balance {balance} is less than amount {amount}")]
    Overspend { balance: Amount, amount: Amount },
    #[error("decrypted residue is not a valid amount; wrong key or inconsistent entries")]
    Corrupt,
}

/// One decryption hint: who sent the amount and with which nonce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DhEntry {
    #[serde(rename = "senderPublicKey")]
    pub sender_pk: Point,
    pub nonce: Fq,
}

/// An encrypted balance plus the entries needed to decrypt it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DhBalance {
    #[serde(rename = "encryptedBalance")]
    pub encrypted: Fq,
    pub entries: Vec<DhEntry>,
}

impl DhBalance {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// A freshly re-encrypted balance owned by `owner_pk`.
    pub fn reset(encrypted: Fq, owner_pk: Point, nonce: Fq) -> Self {
        DhBalance {
            encrypted,
            entries: vec![DhEntry {
                sender_pk: owner_pk,
                nonce,
            }],
        }
    }

    /// Adds an incoming ciphertext and records its decryption entry.
    pub fn credit(&mut self, ciphertext: Fq, entry: DhEntry) {
        self.encrypted = aggregate_encrypted(self.encrypted, ciphertext);
        self.entries.push(entry);
    }

    /// Moves everything from `other` into `self`.
    pub fn absorb(&mut self, other: DhBalance) {
        self.encrypted = aggregate_encrypted(self.encrypted, other.encrypted);
        self.entries.extend(other.entries);
    }
}

/// x-coordinate of `sk·pk_other`.
pub fn shared_key(sk: &Fl, pk_other: &Point) -> Result<Fq, DhError> {
    if sk.is_zero() || pk_other.is_identity() {
        return Err(DhError::DegenerateKey);
    }
    Ok(pk_other.scalar_mul(sk).x())
}

/// `K_x + poseidon(K_x, n)`.
pub fn mask(k_x: Fq, n: Fq) -> Fq {
    k_x + poseidon2(k_x, n)
}

/// Masks an arbitrary field value; the verifier uses this on unchecked
/// witness values.
pub(crate) fn encrypt_value(value: Fq, sk: &Fl, pk: &Point, n: Fq) -> Result<Fq, DhError> {
    Ok(value + mask(shared_key(sk, pk)?, n))
}

pub fn amount_to_field(a: Amount) -> Fq {
    Fq::from(a.value())
}

/// `a + mask(shared_key(sk_s, pk_r), n)`.
pub fn encrypt_amount(a: Amount, sk_s: &Fl, pk_r: &Point, n: Fq) -> Result<Fq, DhError> {
    encrypt_value(amount_to_field(a), sk_s, pk_r, n)
}

pub fn aggregate_encrypted(acc: Fq, a_enc: Fq) -> Fq {
    acc + a_enc
}

/// Strips every entry's mask and range-checks the residue.
pub fn decrypt_balance(sk: &Fl, bal: &DhBalance) -> Result<Amount, DhError> {
    let mut residue = bal.encrypted;
    for entry in &bal.entries {
        residue -= mask(shared_key(sk, &entry.sender_pk)?, entry.nonce);
    }
    let limbs = residue.to_limbs();
    if limbs[2] != 0 || limbs[3] != 0 {
        return Err(DhError::Corrupt);
    }
    let value = (u128::from(limbs[1]) << 64) | u128::from(limbs[0]);
    if value >= AMOUNT_LIMIT {
        return Err(DhError::Corrupt);
    }
    Amount::new(value).map_err(|_| DhError::Corrupt)
}

/// `(b_s − a) + mask(shared_key(sk, sk·G), n)`: the sender's remaining
/// balance under its self-DH key. The matching [`DhBalance`] is
/// `DhBalance::reset(result, sk·G, n)`.
pub fn encrypt_new_sender_balance(b_s: Amount, a: Amount, sk: &Fl, n: Fq) -> Result<Fq, DhError> {
    let remaining = b_s
        .checked_sub(a)
        .ok_or(DhError::Overspend { balance: b_s, amount: a })?;
    let own_pk = generator_g().scalar_mul(sk);
    encrypt_value(amount_to_field(remaining), sk, &own_pk, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn amt(v: u128) -> Amount {
        Amount::new(v).unwrap()
    }

    fn keypair(rng: &mut ChaCha20Rng) -> (Fl, Point) {
        let sk = Fl::random(rng);
        (sk, generator_g().scalar_mul(&sk))
    }

    #[test]
    fn shared_key_symmetry() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (ska, pka) = keypair(&mut rng);
        let (skb, pkb) = keypair(&mut rng);
        assert_eq!(shared_key(&ska, &pkb).unwrap(), shared_key(&skb, &pka).unwrap());
        assert_eq!(
            shared_key(&ska, &pka).unwrap(),
            generator_g().scalar_mul(&(ska * ska)).x()
        );
    }

    #[test]
    fn degenerate_keys_rejected() {
        let g = generator_g();
        assert_eq!(shared_key(&Fl::ONE, &Point::IDENTITY), Err(DhError::DegenerateKey));
        assert_eq!(shared_key(&Fl::ZERO, &g), Err(DhError::DegenerateKey));
    }

    #[test]
    fn mask_depends_on_nonce() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let k = Fq::random(&mut rng);
        for _ in 0..50 {
            let (n1, n2) = (Fq::random(&mut rng), Fq::random(&mut rng));
            assert_eq!(mask(k, n1), mask(k, n1));
            assert_ne!(mask(k, n1), mask(k, n2));
        }
    }

    #[test]
    fn zero_amount_is_pure_mask() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (sks, _) = keypair(&mut rng);
        let (_, pkr) = keypair(&mut rng);
        let n = Fq::random(&mut rng);
        let k = shared_key(&sks, &pkr).unwrap();
        assert_eq!(encrypt_amount(Amount::ZERO, &sks, &pkr, n).unwrap(), mask(k, n));
    }

    #[test]
    fn single_entry_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (sks, pks) = keypair(&mut rng);
        let (skr, pkr) = keypair(&mut rng);
        let n = Fq::random(&mut rng);
        let a = amt(987_654_321);
        let ct = encrypt_amount(a, &sks, &pkr, n).unwrap();
        assert_ne!(ct, amount_to_field(a));
        let mut bal = DhBalance::empty();
        bal.credit(ct, DhEntry { sender_pk: pks, nonce: n });
        assert_eq!(decrypt_balance(&skr, &bal).unwrap(), a);
    }

    #[test]
    fn empty_balance_decrypts_to_zero() {
        assert_eq!(decrypt_balance(&Fl::from(5u64), &DhBalance::empty()).unwrap(), Amount::ZERO);
    }

    #[test]
    fn wrong_key_is_reported_as_corruption() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (sks, pks) = keypair(&mut rng);
        let (_, pkr) = keypair(&mut rng);
        let n = Fq::random(&mut rng);
        let mut bal = DhBalance::empty();
        bal.credit(encrypt_amount(amt(10), &sks, &pkr, n).unwrap(), DhEntry { sender_pk: pks, nonce: n });
        assert_eq!(decrypt_balance(&Fl::random(&mut rng), &bal), Err(DhError::Corrupt));
    }

    #[test]
    fn aggregation_is_order_independent() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let cts: Vec<Fq> = (0..10).map(|_| Fq::random(&mut rng)).collect();
        let forward = cts.iter().fold(Fq::ZERO, |acc, c| aggregate_encrypted(acc, *c));
        let backward = cts.iter().rev().fold(Fq::ZERO, |acc, c| aggregate_encrypted(acc, *c));
        assert_eq!(forward, backward);
        let q = Fq::modulus();
        let expected = cts.iter().fold(num_bigint::BigUint::default(), |acc, c| acc + c.to_biguint()) % q;
        assert_eq!(forward.to_biguint(), expected);
        assert_eq!(aggregate_encrypted(Fq::ZERO, cts[0]), cts[0]);
    }

    #[test]
    fn many_senders_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (skr, pkr) = keypair(&mut rng);
        let senders: Vec<_> = (0..3).map(|_| keypair(&mut rng)).collect();
        let mut bal = DhBalance::empty();
        let mut plain = 0u128;
        for _ in 0..20 {
            let (sks, pks) = senders[rng.gen_range(0..3)];
            let a = rng.gen_range(0..1u128 << 64);
            let n = Fq::random(&mut rng);
            plain += a;
            bal.credit(encrypt_amount(amt(a), &sks, &pkr, n).unwrap(), DhEntry { sender_pk: pks, nonce: n });
        }
        assert_eq!(decrypt_balance(&skr, &bal).unwrap(), amt(plain));
    }

    #[test]
    fn sender_reset() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, pk) = keypair(&mut rng);
        let n = Fq::random(&mut rng);
        let ct = encrypt_new_sender_balance(amt(100), amt(30), &sk, n).unwrap();
        let bal = DhBalance::reset(ct, pk, n);
        assert_eq!(bal.entries.len(), 1);
        assert_eq!(decrypt_balance(&sk, &bal).unwrap(), amt(70));

        let exact = encrypt_new_sender_balance(amt(30), amt(30), &sk, n).unwrap();
        assert_eq!(exact, mask(shared_key(&sk, &pk).unwrap(), n));

        assert_eq!(
            encrypt_new_sender_balance(amt(5), amt(6), &sk, n),
            Err(DhError::Overspend { balance: amt(5), amount: amt(6) })
        );
    }

    #[test]
    fn unwrap_formula_matches_transfer_formula() {
        // Withdrawing `a` and transferring `a` re-encrypt the same remaining
        // balance: both equal (b − a) + K_self + poseidon(K_self, n).
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (sk, pk) = keypair(&mut rng);
        let n = Fq::random(&mut rng);
        let k = pk.scalar_mul(&sk).x();
        let by_formula = amount_to_field(amt(60)) + k + poseidon2(k, n);
        assert_eq!(encrypt_new_sender_balance(amt(90), amt(30), &sk, n).unwrap(), by_formula);
    }

    #[test]
    fn nonce_changes_ciphertext() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let (sks, _) = keypair(&mut rng);
        let (_, pkr) = keypair(&mut rng);
        let a = amt(42);
        let c1 = encrypt_amount(a, &sks, &pkr, Fq::from(1u64)).unwrap();
        let c2 = encrypt_amount(a, &sks, &pkr, Fq::from(2u64)).unwrap();
        assert_ne!(c1, c2);
    }

    #[test]
    fn json_field_names() {
        let bal = DhBalance::reset(Fq::from(3u64), generator_g(), Fq::from(4u64));
        let v = serde_json::to_value(&bal).unwrap();
        assert!(v.get("encryptedBalance").is_some());
        assert!(v["entries"][0].get("senderPublicKey").is_some());
        assert!(v["entries"][0].get("nonce").is_some());
        assert_eq!(serde_json::from_value::<DhBalance>(v).unwrap(), bal);
    }
}
