//! babyJubJub twisted Edwards arithmetic.
//!
//! Curve: `a·x² + y² = 1 + d·x²·y²` over [`Fq`] with a = 168700,
//! d = 168696 (EIP-2494). The group has order 8·l; the protocol only
//! uses the prime-order subgroup of order l, generated by the EIP-2494
//! `Base8` point.
//!
//! [`Point`] is always affine and always on the curve: every constructor
//! validates, so the group operations themselves cannot receive an
//! off-curve input. Scalar multiplication runs in projective coordinates
//! internally and normalizes once at the end.

mod field;

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::hashing::keccak256;

pub use field::{Fl, Fq};

pub const A_COEFF: u64 = 168_700;
pub const D_COEFF: u64 = 168_696;
pub const COFACTOR: u64 = 8;

/// EIP-2494 `Base8`, the generator of the order-l subgroup.
const BASE8_X: &str = "5299619240641551281634865583518297030282874472190772894086521144482721001553";
const BASE8_Y: &str = "16950150798460657717958625567821834550301663161624707787222815936182638968203";

/// Domain tag for the nothing-up-my-sleeve second generator.
pub const H_DOMAIN_TAG: &[u8] = b"cWETH:H";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("value is not a canonical {0} element")]
    NonCanonical(&'static str),
    #[error("encoding error: {0}")]
    Encoding(String),
}

fn coeff_a() -> Fq {
    Fq::from(A_COEFF)
}

fn coeff_d() -> Fq {
    Fq::from(D_COEFF)
}

/// Affine curve point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    x: Fq,
    y: Fq,
}

impl Point {
    pub const IDENTITY: Point = Point {
        x: Fq::ZERO,
        y: Fq::ONE,
    };

    /// Builds a point from coordinates, rejecting anything off the curve.
    pub fn new(x: Fq, y: Fq) -> Result<Self, CurveError> {
        let p = Point { x, y };
        if p.is_on_curve() {
            Ok(p)
        } else {
            Err(CurveError::NotOnCurve)
        }
    }

    pub fn x(&self) -> Fq {
        self.x
    }

    pub fn y(&self) -> Fq {
        self.y
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    fn is_on_curve(&self) -> bool {
        let x2 = self.x.square();
        let y2 = self.y.square();
        coeff_a() * x2 + y2 == Fq::ONE + coeff_d() * x2 * y2
    }

    /// Complete affine addition; the denominators never vanish on this curve
    /// because `a` is a square and `d` is not.
    pub fn add(&self, other: &Point) -> Point {
        let x1x2 = self.x * other.x;
        let y1y2 = self.y * other.y;
        let k = coeff_d() * x1x2 * y1y2;
        let x3 = (self.x * other.y + self.y * other.x)
            * (Fq::ONE + k).inverse().expect("complete addition");
        let y3 = (y1y2 - coeff_a() * x1x2) * (Fq::ONE - k).inverse().expect("complete addition");
        Point { x: x3, y: y3 }
    }

    pub fn negate(&self) -> Point {
        Point {
            x: -self.x,
            y: self.y,
        }
    }

    pub fn double(&self) -> Point {
        self.add(self)
    }

    pub fn scalar_mul(&self, s: &Fl) -> Point {
        self.mul_limbs(&s.to_limbs())
    }

    /// Multiplies by an arbitrary non-negative integer, not reduced mod l.
    pub fn mul_uint(&self, k: &BigUint) -> Point {
        self.mul_limbs(&k.to_u64_digits())
    }

    /// Double-and-add over little-endian limbs. Not constant time.
    fn mul_limbs(&self, limbs: &[u64]) -> Point {
        let base = Projective::from(*self);
        let mut acc = Projective::IDENTITY;
        for limb in limbs.iter().rev() {
            for bit in (0..64).rev() {
                acc = acc.double();
                if (limb >> bit) & 1 == 1 {
                    acc = acc.add(&base);
                }
            }
        }
        acc.to_affine()
    }

    /// On the curve (guaranteed by construction) and annihilated by l.
    pub fn in_subgroup(&self) -> bool {
        self.is_on_curve() && self.mul_uint(&Fl::modulus()).is_identity()
    }

    /// 64 bytes: big-endian x followed by big-endian y.
    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.x.to_be_bytes());
        out[32..].copy_from_slice(&self.y.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 64]) -> Result<Self, CurveError> {
        let mut half = [0u8; 32];
        half.copy_from_slice(&bytes[..32]);
        let x = Fq::from_be_bytes(&half)?;
        half.copy_from_slice(&bytes[32..]);
        let y = Fq::from_be_bytes(&half)?;
        Point::new(x, y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::add(&self, &rhs)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::add(&self, &rhs.negate())
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.negate()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({}, {})", self.x, self.y)
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y] = <[Fq; 2]>::deserialize(deserializer)?;
        Point::new(x, y).map_err(serde::de::Error::custom)
    }
}

/// Projective (X : Y : Z) with x = X/Z, y = Y/Z.
#[derive(Clone, Copy)]
struct Projective {
    x: Fq,
    y: Fq,
    z: Fq,
}

impl Projective {
    const IDENTITY: Projective = Projective {
        x: Fq::ZERO,
        y: Fq::ONE,
        z: Fq::ONE,
    };

    // add-2008-bbjlp
    fn add(&self, other: &Projective) -> Projective {
        let a = self.z * other.z;
        let b = a.square();
        let c = self.x * other.x;
        let d = self.y * other.y;
        let e = coeff_d() * c * d;
        let f = b - e;
        let g = b + e;
        let x3 = a * f * ((self.x + self.y) * (other.x + other.y) - c - d);
        let y3 = a * g * (d - coeff_a() * c);
        Projective {
            x: x3,
            y: y3,
            z: f * g,
        }
    }

    // dbl-2008-bbjlp
    fn double(&self) -> Projective {
        let b = (self.x + self.y).square();
        let c = self.x.square();
        let d = self.y.square();
        let e = coeff_a() * c;
        let f = e + d;
        let h = self.z.square();
        let j = f - h - h;
        Projective {
            x: (b - c - d) * j,
            y: f * (e - d),
            z: f * j,
        }
    }

    fn to_affine(self) -> Point {
        let inv = self.z.inverse().expect("projective z is never zero");
        Point {
            x: self.x * inv,
            y: self.y * inv,
        }
    }
}

impl From<Point> for Projective {
    fn from(p: Point) -> Self {
        Projective {
            x: p.x,
            y: p.y,
            z: Fq::ONE,
        }
    }
}

pub fn point_add(p1: &Point, p2: &Point) -> Point {
    p1.add(p2)
}

pub fn scalar_mul(s: &Fl, p: &Point) -> Point {
    p.scalar_mul(s)
}

pub fn negate(p: &Point) -> Point {
    p.negate()
}

pub fn in_subgroup(p: &Point) -> bool {
    p.in_subgroup()
}

/// The subgroup generator G (EIP-2494 `Base8`).
pub fn generator_g() -> Point {
    static G: OnceLock<Point> = OnceLock::new();
    *G.get_or_init(|| {
        Point::new(BASE8_X.parse().unwrap(), BASE8_Y.parse().unwrap())
            .expect("Base8 lies on the curve")
    })
}

/// The second generator H, found by hashing to the curve.
pub fn generator_h() -> Point {
    static H: OnceLock<Point> = OnceLock::new();
    *H.get_or_init(|| hash_to_subgroup(H_DOMAIN_TAG).1)
}

/// Try-and-increment: for c = 0, 1, 2, … take `y = keccak256(tag ‖ c_be32) mod q`,
/// solve the curve equation for x (smaller root), clear the cofactor and
/// return the first non-identity subgroup point together with its counter.
pub fn hash_to_subgroup(tag: &[u8]) -> (u32, Point) {
    let a = coeff_a();
    let d = coeff_d();
    for counter in 0u32.. {
        let mut preimage = tag.to_vec();
        preimage.extend_from_slice(&counter.to_be_bytes());
        let y = Fq::from_be_bytes_mod_order(keccak256(&preimage).as_bytes());
        let y2 = y.square();
        let Some(den_inv) = (a - d * y2).inverse() else {
            continue;
        };
        let Some(root) = ((Fq::ONE - y2) * den_inv).sqrt() else {
            continue;
        };
        let x = root.min(-root);
        let candidate = Point::new(x, y).expect("solved coordinates satisfy the curve");
        let p = candidate.mul_uint(&BigUint::from(COFACTOR));
        if !p.is_identity() && p.in_subgroup() {
            return (counter, p);
        }
    }
    unreachable!("hash-to-curve exhausted the counter space")
}
