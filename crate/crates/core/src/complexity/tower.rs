//! Power towers `a_n = n^n^...^n` (`n` copies): astronomically large numbers
//! with programs whose length grows only with the literal `n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::encoded_len;
use crate::recfun::{eval, library, EvalOutcome, Term};
use crate::Nat;

/// Largest `n` whose tower is actually evaluated.
pub const MAX_EVALUATED_TOWER: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("tower height must be at least 1")]
    Zero,
    #[error("a_{0} is too large to evaluate (a_4 already has over 10^153 digits)")]
    TooLarge(u64),
}

/// `C[tet; Z(n), Z(n)]`, a closed term for `a_n`.
pub fn tower_program(n: u64) -> Result<Term, TowerError> {
    if n == 0 {
        return Err(TowerError::Zero);
    }
    Term::compose(
        library::tetration(),
        vec![Term::constant(n), Term::constant(n)],
    )
    .map_err(|_| unreachable!("tetration has arity 2"))
}

/// Evaluates `a_n` for `n ≤ 3`; refuses larger towers.
pub fn tower_value(n: u64) -> Result<EvalOutcome, TowerError> {
    let t = tower_program(n)?;
    if n > MAX_EVALUATED_TOWER {
        return Err(TowerError::TooLarge(n));
    }
    Ok(eval(&t, &[], u64::MAX).expect("closed term"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerLengths {
    /// `(n, encoded bits)` for `n = 1..=max_n`.
    pub lengths: Vec<(u64, usize)>,
    /// Smallest `c` with `bits(n) ≤ c·n` for all listed `n`.
    pub c: f64,
}

pub fn tower_lengths(max_n: u64) -> TowerLengths {
    let lengths: Vec<(u64, usize)> = (1..=max_n)
        .map(|n| (n, encoded_len(&tower_program(n).expect("n >= 1"))))
        .collect();
    let c = lengths
        .iter()
        .map(|&(n, bits)| bits as f64 / n as f64)
        .fold(0.0, f64::max);
    TowerLengths { lengths, c }
}

/// Direct big-integer value of `a_n`, for checking small towers.
pub fn tower_reference(n: u32) -> Nat {
    let mut acc = num_bigint::BigUint::from(1u32);
    for _ in 0..n {
        let e: u32 = acc.clone().try_into().expect("small exponent");
        acc = num_bigint::BigUint::from(n).pow(e);
    }
    Nat::from(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_towers() {
        assert_eq!(tower_value(1).unwrap().value(), Some(&Nat::from(1u64)));
        assert_eq!(tower_value(2).unwrap().value(), Some(&Nat::from(4u64)));
        assert_eq!(tower_reference(2), Nat::from(4u64));
        assert_eq!(tower_reference(3), Nat::pow(3, 27));
    }

    #[test]
    fn refuses_large_towers() {
        assert_eq!(tower_value(4), Err(TowerError::TooLarge(4)));
        assert!(tower_program(4).is_ok());
        assert_eq!(tower_program(0), Err(TowerError::Zero));
    }

    #[test]
    fn linear_length() {
        let l = tower_lengths(8);
        assert_eq!(l.lengths.len(), 8);
        assert!(l
            .lengths
            .iter()
            .all(|&(n, bits)| bits as f64 <= l.c * n as f64));
        // only the two literals change with n
        let (_, b1) = l.lengths[0];
        let (_, b8) = l.lengths[7];
        assert!(b8 - b1 <= 2 * 6);
    }
}
