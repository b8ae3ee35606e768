//! Arbitrary-precision natural numbers with an inline fast path.
//!
//! Almost every value produced by a budgeted evaluation fits in a machine
//! word, so [`Nat`] keeps those inline and only spills to [`BigUint`] on
//! overflow.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number (including zero) of unbounded size.
///
/// Invariant: `Big` is only used for values above `u64::MAX`, so equality and
/// hashing can be derived structurally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Nat {
    Small(u64),
    Big(Box<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);
    pub const ONE: Nat = Nat::Small(1);

    fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(Box::new(b)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Nat::Small(v) => Some(*v),
            Nat::Big(_) => None,
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    pub fn succ(&self) -> Nat {
        match self {
            Nat::Small(v) => match v.checked_add(1) {
                Some(w) => Nat::Small(w),
                None => Nat::Big(Box::new(BigUint::from(*v) + 1u32)),
            },
            Nat::Big(b) => Nat::Big(Box::new(&**b + 1u32)),
        }
    }

    /// `self + factor * count`, the closed form of an iterated successor chain.
    pub fn add_scaled(&self, factor: u64, count: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(c)) = (self, count) {
            if let Some(v) = factor.checked_mul(*c).and_then(|p| p.checked_add(*a)) {
                return Nat::Small(v);
            }
        }
        Nat::from_big(self.to_biguint() + count.to_biguint() * factor)
    }

    /// Truncated subtraction `max(self - other, 0)`.
    pub fn monus(&self, other: &Nat) -> Nat {
        if self <= other {
            return Nat::ZERO;
        }
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => Nat::Small(a - b),
            _ => Nat::from_big(self.to_biguint() - other.to_biguint()),
        }
    }

    /// Number of bits in the binary expansion (0 for zero).
    pub fn bit_len(&self) -> u64 {
        match self {
            Nat::Small(v) => 64 - u64::from(v.leading_zeros()),
            Nat::Big(b) => b.bits(),
        }
    }

    pub fn pow(base: u64, exp: u32) -> Nat {
        Nat::from_big(BigUint::from(base).pow(exp))
    }

    /// Lossy conversion for reporting.
    pub fn to_f64(&self) -> f64 {
        match self {
            Nat::Small(v) => *v as f64,
            Nat::Big(b) => b.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<u32> for Nat {
    fn from(v: u32) -> Self {
        Nat::Small(u64::from(v))
    }
}

impl From<usize> for Nat {
    fn from(v: usize) -> Self {
        Nat::Small(v as u64)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        Nat::from_big(b)
    }
}

impl From<&Nat> for BigUint {
    fn from(n: &Nat) -> Self {
        n.to_biguint()
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a natural number: {0:?}")]
pub struct ParseNatError(pub String);

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.to_string()));
        }
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Nat::Small(v));
        }
        BigUint::from_str(s)
            .map(Nat::from_big)
            .map_err(|_| ParseNatError(s.to_string()))
    }
}

/// Word-sized values serialize as JSON numbers, larger ones as decimal strings.
impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Nat::Small(v) => serializer.serialize_u64(*v),
            Nat::Big(b) => serializer.serialize_str(&b.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(Nat::Small(v)),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl Zero for Nat {
    fn zero() -> Self {
        Nat::ZERO
    }

    fn is_zero(&self) -> bool {
        Nat::is_zero(self)
    }
}

impl std::ops::Add for Nat {
    type Output = Nat;

    fn add(self, rhs: Nat) -> Nat {
        self.add_scaled(1, &rhs)
    }
}
