use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Exact non-negative dyadic rational `num / 2^log2_den`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic", into = "RawDyadic")]
pub struct Dyadic {
    num: u128,
    log2_den: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDyadic {
    num: u128,
    log2_den: u32,
}

impl From<Dyadic> for RawDyadic {
    fn from(d: Dyadic) -> RawDyadic {
        RawDyadic {
            num: d.num,
            log2_den: d.log2_den,
        }
    }
}

impl TryFrom<RawDyadic> for Dyadic {
    type Error = String;
    fn try_from(r: RawDyadic) -> Result<Dyadic, String> {
        Dyadic::new(r.num, r.log2_den).ok_or_else(|| "denominator exponent too large".into())
    }
}

/// Exponents beyond this cannot be aligned inside a `u128`.
pub const MAX_LOG2_DEN: u32 = 120;

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        num: 0,
        log2_den: 0,
    };
    pub const ONE: Dyadic = Dyadic {
        num: 1,
        log2_den: 0,
    };

    pub fn new(num: u128, log2_den: u32) -> Option<Dyadic> {
        if log2_den > MAX_LOG2_DEN {
            return None;
        }
        Some(Dyadic { num, log2_den }.reduced())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Dyadic {
        assert!(k <= MAX_LOG2_DEN);
        Dyadic {
            num: 1,
            log2_den: k,
        }
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn reduced(self) -> Dyadic {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        let shift = self.num.trailing_zeros().min(self.log2_den);
        Dyadic {
            num: self.num >> shift,
            log2_den: self.log2_den - shift,
        }
    }

    /// Numerator over the common denominator `2^d`, `d ≥ log2_den`.
    fn scaled(&self, d: u32) -> u128 {
        self.num
            .checked_shl(d - self.log2_den)
            .filter(|v| v >> (d - self.log2_den) == self.num)
            .expect("dyadic overflow")
    }

    pub fn checked_add(&self, other: &Dyadic) -> Option<Dyadic> {
        let d = self.log2_den.max(other.log2_den);
        let a = self.num.checked_shl(d - self.log2_den)?;
        let b = other.num.checked_shl(d - other.log2_den)?;
        if a >> (d - self.log2_den) != self.num || b >> (d - other.log2_den) != other.num {
            return None;
        }
        Some(
            Dyadic {
                num: a.checked_add(b)?,
                log2_den: d,
            }
            .reduced(),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 * (-(self.log2_den as f64)).exp2()
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        self.checked_add(&rhs).expect("dyadic overflow")
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = *self + rhs;
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Dyadic) -> Ordering {
        let d = self.log2_den.max(other.log2_den);
        self.scaled(d).cmp(&other.scaled(d))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.log2_den)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic() {
        let half = Dyadic::pow2_neg(1);
        assert_eq!(half + half, Dyadic::ONE);
        let three_eighths = Dyadic::pow2_neg(2) + Dyadic::pow2_neg(3);
        assert_eq!(
            (three_eighths.numerator(), three_eighths.log2_den()),
            (3, 3)
        );
        assert!(three_eighths < half);
        assert_eq!(Dyadic::new(12, 4).unwrap(), Dyadic::new(3, 2).unwrap());
        assert_eq!(Dyadic::new(0, 9).unwrap(), Dyadic::ZERO);
        assert_eq!(half.to_f64(), 0.5);
        assert!(Dyadic::new(1, 121).is_none());
    }

    #[test]
    fn serde_round_trip() {
        let d = Dyadic::new(u128::MAX, 120).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Dyadic>(&s).unwrap(), d);
    }

    proptest! {
        #[test]
        fn add_matches_rationals(a in 0u64..1 << 40, ea in 0u32..40, b in 0u64..1 << 40, eb in 0u32..40) {
            let x = Dyadic::new(a as u128, ea).unwrap();
            let y = Dyadic::new(b as u128, eb).unwrap();
            let s = x + y;
            // compare over the common denominator 2^80
            let lhs = (a as u128) << (80 - ea) ;
            let rhs = (b as u128) << (80 - eb);
            prop_assert_eq!(s.numerator() << (80 - s.log2_den()), lhs + rhs);
            prop_assert_eq!(x.cmp(&y), lhs.cmp(&rhs));
            prop_assert_eq!(s, y + x);
        }
    }
}
