//! Deterministic derivation of the confidential key pair from a wallet
//! signature over the `KDF(address cWETHAddress)` struct hash.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::curve::{generator_g, Fl, Point};
use crate::encoding::hex_bytes;
use crate::hashing::{keccak256, Digest32};

pub const KDF_TYPE: &str = "KDF(address cWETHAddress)";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KdfError {
    #[error("empty signature")]
    EmptySignature,
    #[error("signature hashes to the zero scalar")]
    ZeroKey,
    #[error("signer failed: {0}")]
    Signer(String),
    #[error("invalid address: {0}")]
    Address(String),
}

/// 20-byte Ethereum account address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EthAddress([u8; 20]);

impl EthAddress {
    pub const fn new(bytes: [u8; 20]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.0))
    }
}

impl FromStr for EthAddress {
    type Err = KdfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        hex_bytes::decode(s).map(Self).map_err(KdfError::Address)
    }
}

impl fmt::Debug for EthAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EthAddress({})", self.to_hex())
    }
}

impl fmt::Display for EthAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for EthAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        hex_bytes::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for EthAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        hex_bytes::deserialize(deserializer).map(Self)
    }
}

/// Produces signature bytes over a digest. Stands in for
/// `eth_signTypedData_v4`; only the bytes matter, as key entropy.
pub trait Signer {
    fn sign(&self, digest: &Digest32) -> Result<Vec<u8>, KdfError>;
}

/// Deterministic signer for tests and scenarios. Emits 65 bytes:
/// `c0 = keccak256(seed ‖ digest)`, `c1 = keccak256(c0)`,
/// `c2 = keccak256(c1)`, signature `c0 ‖ c1 ‖ c2[0]`.
#[derive(Debug, Clone)]
pub struct TestSigner {
    seed: Vec<u8>,
}

impl TestSigner {
    pub fn new(seed: impl Into<Vec<u8>>) -> Self {
        Self { seed: seed.into() }
    }
}

impl Signer for TestSigner {
    fn sign(&self, digest: &Digest32) -> Result<Vec<u8>, KdfError> {
        let mut preimage = self.seed.clone();
        preimage.extend_from_slice(digest.as_bytes());
        let c0 = keccak256(&preimage);
        let c1 = keccak256(c0.as_bytes());
        let c2 = keccak256(c1.as_bytes());
        let mut sig = Vec::with_capacity(65);
        sig.extend_from_slice(c0.as_bytes());
        sig.extend_from_slice(c1.as_bytes());
        sig.push(c2.as_bytes()[0]);
        Ok(sig)
    }
}

/// Private scalar and its public point `pk = sk·G`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPair {
    pub sk: Fl,
    pub pk: Point,
}

impl KeyPair {
    pub fn from_secret(sk: Fl) -> Result<Self, KdfError> {
        if sk.is_zero() {
            return Err(KdfError::ZeroKey);
        }
        Ok(KeyPair {
            sk,
            pk: generator_g().scalar_mul(&sk),
        })
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("pk", &self.pk).finish_non_exhaustive()
    }
}

/// `keccak256(typehash ‖ 0^12 ‖ address)` with `typehash = keccak256(KDF_TYPE)`.
pub fn kdf_struct_hash(cweth_address: &EthAddress) -> Digest32 {
    let mut preimage = [0u8; 64];
    preimage[..32].copy_from_slice(keccak256(KDF_TYPE.as_bytes()).as_bytes());
    preimage[44..].copy_from_slice(cweth_address.as_bytes());
    keccak256(&preimage)
}

/// `keccak256(keccak256(signature))`, big-endian, reduced mod l.
pub fn derive_private_key(signature: &[u8]) -> Result<Fl, KdfError> {
    if signature.is_empty() {
        return Err(KdfError::EmptySignature);
    }
    let digest = keccak256(keccak256(signature).as_bytes());
    let sk = Fl::from_be_bytes_mod_order(digest.as_bytes());
    if sk.is_zero() {
        return Err(KdfError::ZeroKey);
    }
    Ok(sk)
}

pub fn derive_keypair<S: Signer + ?Sized>(
    signer: &S,
    cweth_address: &EthAddress,
) -> Result<KeyPair, KdfError> {
    let digest = kdf_struct_hash(cweth_address);
    let signature = signer.sign(&digest)?;
    KeyPair::from_secret(derive_private_key(&signature)?)
}
