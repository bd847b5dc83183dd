//! The state file: a ledger plus the scenario seed and the actors it has
//! introduced. Everything random is derived from the seed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use cweth_core::hashing::keccak256;
use cweth_core::kdf::{derive_keypair, TestSigner};
use cweth_core::ledger::store;
use cweth_core::{EthAddress, KeyPair, LedgerState};

use crate::error::CliError;

pub const STATE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFile {
    pub version: u32,
    #[serde(serialize_with = "ser_seed", deserialize_with = "de_seed")]
    pub seed: Vec<u8>,
    pub contract_address: EthAddress,
    pub actors: BTreeMap<String, EthAddress>,
    pub ledger: LedgerState,
}

#[derive(Debug, Clone)]
pub struct Actor {
    pub name: String,
    pub address: EthAddress,
    pub keypair: KeyPair,
}

fn ser_seed<S: Serializer>(seed: &[u8], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("0x{}", hex::encode(seed)))
}

fn de_seed<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
    parse_seed(&String::deserialize(d)?).map_err(serde::de::Error::custom)
}

/// Hex, with or without `0x`.
pub fn parse_seed(s: &str) -> Result<Vec<u8>, String> {
    hex::decode(s.strip_prefix("0x").unwrap_or(s)).map_err(|e| format!("seed {s:?}: {e}"))
}

fn tagged(seed: &[u8], tag: &str, name: &str) -> [u8; 32] {
    let mut buf = seed.to_vec();
    buf.extend_from_slice(tag.as_bytes());
    buf.extend_from_slice(name.as_bytes());
    *keccak256(&buf).as_bytes()
}

fn address_from(digest: [u8; 32]) -> EthAddress {
    let mut a = [0u8; 20];
    a.copy_from_slice(&digest[12..]);
    EthAddress::new(a)
}

impl ChainFile {
    pub fn new(seed: &[u8]) -> Self {
        ChainFile {
            version: STATE_VERSION,
            seed: seed.to_vec(),
            contract_address: address_from(tagged(seed, "contract", "")),
            actors: BTreeMap::new(),
            ledger: LedgerState::new(tagged(seed, "ledger", "")),
        }
    }

    /// Address `keccak(seed ‖ "actor:" ‖ name)[12..]`; keys from the test
    /// signer seeded with `seed ‖ "signer:" ‖ name`.
    pub fn derive_actor(&self, name: &str) -> Result<Actor, CliError> {
        let address = address_from(tagged(&self.seed, "actor:", name));
        let mut signer_seed = self.seed.clone();
        signer_seed.extend_from_slice(b"signer:");
        signer_seed.extend_from_slice(name.as_bytes());
        let keypair = derive_keypair(&TestSigner::new(signer_seed), &self.contract_address)
            .map_err(cweth_core::LedgerError::from)?;
        Ok(Actor {
            name: name.to_string(),
            address,
            keypair,
        })
    }

    /// An actor previously introduced with keygen.
    pub fn actor(&self, name: &str) -> Result<Actor, CliError> {
        if !self.actors.contains_key(name) {
            return Err(CliError::UnknownActor(name.to_string()));
        }
        self.derive_actor(name)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        if !path.exists() {
            return Err(CliError::StateMissing(path.display().to_string()));
        }
        let chain: ChainFile = store::load(path)?;
        if chain.version != STATE_VERSION {
            return Err(CliError::Version(chain.version));
        }
        Ok(chain)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        Ok(store::save_atomic(path, self)?)
    }
}
