//! The two prime fields of babyJubJub.
//!
//! [`Fq`] is the coordinate field (the BN254 scalar field). Curve
//! coordinates, Poseidon inputs and every DH ciphertext live here.
//! [`Fl`] is the scalar field of the prime-order subgroup. Private keys,
//! commitment nonces and committed values live here.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use ark_ff::fields::{Fp256, MontBackend, MontConfig};
use ark_ff::{AdditiveGroup, BigInteger, Field, PrimeField, Zero};
use num_bigint::BigUint;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CurveError;

#[derive(MontConfig)]
#[modulus = "21888242871839275222246405745257275088548364400416034343698204186575808495617"]
#[generator = "5"]
pub struct FqConfig;

#[derive(MontConfig)]
#[modulus = "2736030358979909402780800718157159386076813972158567259200215660948447373041"]
#[generator = "31"]
pub struct FlConfig;

pub(crate) type FqInner = Fp256<MontBackend<FqConfig, 4>>;
pub(crate) type FlInner = Fp256<MontBackend<FlConfig, 4>>;

macro_rules! prime_field {
    ($(#[$doc:meta])* $name:ident, $inner:ty, $label:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
        pub struct $name(pub(crate) $inner);

        impl $name {
            pub const ZERO: Self = Self(<$inner>::ZERO);
            pub const ONE: Self = Self(<$inner>::ONE);

            /// The field modulus as a big integer.
            pub fn modulus() -> BigUint {
                <$inner as PrimeField>::MODULUS.into()
            }

            /// Interprets `bytes` as a big-endian integer and reduces it.
            pub fn from_be_bytes_mod_order(bytes: &[u8]) -> Self {
                Self(<$inner>::from_be_bytes_mod_order(bytes))
            }

            /// Parses exactly 32 big-endian bytes holding a canonical (reduced) value.
            pub fn from_be_bytes(bytes: &[u8; 32]) -> Result<Self, CurveError> {
                let value = BigUint::from_bytes_be(bytes);
                if value >= Self::modulus() {
                    return Err(CurveError::NonCanonical($label));
                }
                Ok(Self::from_be_bytes_mod_order(bytes))
            }

            pub fn to_be_bytes(&self) -> [u8; 32] {
                let bytes = self.0.into_bigint().to_bytes_be();
                let mut out = [0u8; 32];
                out[32 - bytes.len()..].copy_from_slice(&bytes);
                out
            }

            pub fn from_biguint(value: &BigUint) -> Self {
                Self::from_be_bytes_mod_order(&value.to_bytes_be())
            }

            pub fn to_biguint(&self) -> BigUint {
                self.0.into_bigint().into()
            }

            /// Canonical representative as little-endian 64-bit limbs.
            pub fn to_limbs(&self) -> [u64; 4] {
                self.0.into_bigint().0
            }

            /// Uniform sample: 512 random bits reduced modulo the field order.
            pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
                let mut wide = [0u8; 64];
                rng.fill_bytes(&mut wide);
                Self(<$inner>::from_le_bytes_mod_order(&wide))
            }

            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }

            pub fn square(&self) -> Self {
                Self(self.0.square())
            }

            /// Multiplicative inverse, `None` for zero.
            pub fn inverse(&self) -> Option<Self> {
                self.0.inverse().map(Self)
            }

            pub fn pow(&self, exp: u64) -> Self {
                Self(self.0.pow([exp]))
            }

            pub fn to_hex(&self) -> String {
                format!("0x{}", hex::encode(self.to_be_bytes()))
            }
        }

        impl From<u64> for $name {
            fn from(v: u64) -> Self {
                Self(<$inner>::from(v))
            }
        }

        impl From<u128> for $name {
            fn from(v: u128) -> Self {
                Self(<$inner>::from(v))
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, rhs: Self) {
                self.0 += rhs.0;
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl SubAssign for $name {
            fn sub_assign(&mut self, rhs: Self) {
                self.0 -= rhs.0;
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                Self(self.0 * rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self(-self.0)
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        // Orders by canonical integer value, so maps keyed by field elements
        // serialize in a stable order.
        impl Ord for $name {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.to_be_bytes().cmp(&other.to_be_bytes())
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.to_hex())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        /// Accepts `0x`-prefixed hex (up to 64 digits) or a plain decimal string.
        impl FromStr for $name {
            type Err = CurveError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let value = if let Some(digits) = s.strip_prefix("0x") {
                    if digits.is_empty() || digits.len() > 64 {
                        return Err(CurveError::Encoding(format!("bad {} hex length", $label)));
                    }
                    BigUint::parse_bytes(digits.as_bytes(), 16)
                } else {
                    BigUint::parse_bytes(s.as_bytes(), 10)
                }
                .ok_or_else(|| CurveError::Encoding(format!("invalid {} literal {s:?}", $label)))?;
                if value >= Self::modulus() {
                    return Err(CurveError::NonCanonical($label));
                }
                Ok(Self::from_biguint(&value))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.to_hex())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

prime_field!(
    /// Element of the coordinate field, q = 21888…5617.
    Fq,
    FqInner,
    "Fq"
);

prime_field!(
    /// Element of the prime-order subgroup's scalar field, l = 27360…3041.
    Fl,
    FlInner,
    "Fl"
);

impl Fq {
    /// A square root, if one exists. Which of the two roots is returned is
    /// unspecified; callers canonicalize.
    pub fn sqrt(&self) -> Option<Self> {
        self.0.sqrt().map(Self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn moduli_match_published_values() {
        assert_eq!(
            Fq::modulus().to_string(),
            "21888242871839275222246405745257275088548364400416034343698204186575808495617"
        );
        assert_eq!(
            Fl::modulus().to_string(),
            "2736030358979909402780800718157159386076813972158567259200215660948447373041"
        );
    }

    #[test]
    fn field_ops_match_bigint_reference() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let q = Fq::modulus();
        let l = Fl::modulus();
        for _ in 0..1000 {
            let (a, b) = (Fq::random(&mut rng), Fq::random(&mut rng));
            let (ai, bi) = (a.to_biguint(), b.to_biguint());
            assert_eq!((a + b).to_biguint(), (&ai + &bi) % &q);
            assert_eq!((a - b).to_biguint(), (&ai + &q - &bi) % &q);
            assert_eq!((a * b).to_biguint(), (&ai * &bi) % &q);
            if !b.is_zero() {
                let inv = b.inverse().unwrap().to_biguint();
                assert_eq!((&bi * &inv) % &q, BigUint::from(1u8));
                assert_eq!(a * b * b.inverse().unwrap(), a);
            }

            let (c, d) = (Fl::random(&mut rng), Fl::random(&mut rng));
            let (ci, di) = (c.to_biguint(), d.to_biguint());
            assert_eq!((c + d).to_biguint(), (&ci + &di) % &l);
            assert_eq!((c - d).to_biguint(), (&ci + &l - &di) % &l);
            assert_eq!((c * d).to_biguint(), (&ci * &di) % &l);
            if !d.is_zero() {
                assert_eq!(c * d * d.inverse().unwrap(), c);
            }
        }
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(Fq::ZERO.inverse().is_none());
        assert!(Fl::ZERO.inverse().is_none());
    }

    #[test]
    fn rejects_non_canonical_encodings() {
        let q_bytes = {
            let b = Fq::modulus().to_bytes_be();
            let mut out = [0u8; 32];
            out.copy_from_slice(&b);
            out
        };
        assert!(matches!(Fq::from_be_bytes(&q_bytes), Err(CurveError::NonCanonical(_))));
        assert!(Fq::from_str(&Fq::modulus().to_string()).is_err());
        assert!("0x".parse::<Fq>().is_err());
        assert!("0xzz".parse::<Fq>().is_err());
        assert_eq!("0x2a".parse::<Fq>().unwrap(), Fq::from(42u64));
        assert_eq!("42".parse::<Fl>().unwrap(), Fl::from(42u64));
    }

    #[test]
    fn hex_round_trip() {
        let v = Fq::from(0xdead_beef_u64);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            "\"0x00000000000000000000000000000000000000000000000000000000deadbeef\""
        );
        assert_eq!(serde_json::from_str::<Fq>(&json).unwrap(), v);
    }
}
