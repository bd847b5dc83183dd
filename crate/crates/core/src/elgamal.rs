//! Twisted-ElGamal commitments to balances and transfer amounts.
//!
//! A commitment is the pair `(C, D) = (v·H + r·G, r·P)` for the owner key
//! `P = sk·G`. Because `sk⁻¹·D = r·G`, the owner can open an aggregate
//! commitment without knowing the summed nonce: `C = v·H + sk⁻¹·D`.
//! Every `D` folded into one balance must be taken over the same `P`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::curve::{generator_g, generator_h, Fl, Point};
use crate::encoding::hex_u128;

/// Exclusive upper bound on balances and amounts.
pub const AMOUNT_LIMIT: u128 = 1 << 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("amount {0} is outside [0, 2^96)")]
pub struct AmountOutOfRange(pub u128);

/// A wei amount in `[0, 2^96)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(u128);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub fn new(value: u128) -> Result<Self, AmountOutOfRange> {
        if value < AMOUNT_LIMIT {
            Ok(Amount(value))
        } else {
            Err(AmountOutOfRange(value))
        }
    }

    pub fn value(&self) -> u128 {
        self.0
    }

    pub fn checked_add(self, other: Amount) -> Option<Amount> {
        Amount::new(self.0 + other.0).ok()
    }

    pub fn checked_sub(self, other: Amount) -> Option<Amount> {
        self.0.checked_sub(other.0).map(Amount)
    }

    pub fn to_scalar(&self) -> Fl {
        Fl::from(self.0)
    }
}

impl From<u32> for Amount {
    fn from(v: u32) -> Self {
        Amount(v.into())
    }
}

impl TryFrom<u128> for Amount {
    type Error = AmountOutOfRange;
    fn try_from(v: u128) -> Result<Self, Self::Error> {
        Amount::new(v)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Amount({})", self.0)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        hex_u128::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = hex_u128::deserialize(deserializer)?;
        Amount::new(raw).map_err(serde::de::Error::custom)
    }
}

/// ElGamal pair `(C, D)`. JSON: `{"C": [x, y], "D": [x, y]}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    #[serde(rename = "C")]
    pub c: Point,
    #[serde(rename = "D")]
    pub d: Point,
}

impl Commitment {
    /// Commits to 0 with aggregate nonce 0.
    pub const IDENTITY: Commitment = Commitment {
        c: Point::IDENTITY,
        d: Point::IDENTITY,
    };
}

impl Default for Commitment {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// `(v·H + r·G, r·pk)` for an arbitrary scalar `v`. The public builders
/// below range-check through [`Amount`]; the circuit verifier calls this
/// directly so that out-of-range witness values still evaluate.
pub(crate) fn commit_scalar(value: Fl, r: &Fl, pk: &Point) -> Commitment {
    Commitment {
        c: generator_h().scalar_mul(&value) + generator_g().scalar_mul(r),
        d: pk.scalar_mul(r),
    }
}

pub(crate) fn commit_scalar_sender(value: Fl, r: &Fl, pk: &Point) -> Commitment {
    Commitment {
        c: generator_g().scalar_mul(r) + generator_h().scalar_mul(&value).negate(),
        d: pk.scalar_mul(r),
    }
}

/// Balance commitment `C = b·H + r·G`, `D = r·pk`.
pub fn commit_balance(b: Amount, r: &Fl, pk: &Point) -> Commitment {
    commit_scalar(b.to_scalar(), r, pk)
}

/// Receiver-side amount commitment `C = a·H + r·G`, `D = r·pk_r`.
pub fn commit_amount_receiver(a: Amount, r: &Fl, pk_r: &Point) -> Commitment {
    commit_scalar(a.to_scalar(), r, pk_r)
}

/// Sender-side amount commitment `C = r·G − a·H`, `D = r·pk_s`; folding it
/// into the sender's balance subtracts `a`.
pub fn commit_amount_sender(a: Amount, r: &Fl, pk_s: &Point) -> Commitment {
    commit_scalar_sender(a.to_scalar(), r, pk_s)
}

/// Component-wise sum.
pub fn aggregate(c1: &Commitment, c2: &Commitment) -> Commitment {
    Commitment {
        c: c1.c + c2.c,
        d: c1.d + c2.d,
    }
}

pub(crate) fn opens_to(c: &Commitment, value: Fl, sk: &Fl) -> bool {
    let Some(sk_inv) = sk.inverse() else {
        return false;
    };
    c.c == generator_h().scalar_mul(&value) + c.d.scalar_mul(&sk_inv)
}

/// Checks `C = b·H + sk⁻¹·D`. False for a zero key.
pub fn verify_opening(c: &Commitment, b: Amount, sk: &Fl) -> bool {
    opens_to(c, b.to_scalar(), sk)
}
