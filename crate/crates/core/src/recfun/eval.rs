//! Step-budgeted evaluation.
//!
//! Cost model: every node visit costs one step, every successor increment one
//! more, and every minimization probe one more. The accounting is a property
//! of the term alone, so step counts are reproducible bit for bit.
//!
//! Primitive recursions whose step term is `S^j ∘ P(a, a)` (the shape of
//! addition) are evaluated in closed form: the result is `base + j·y` and
//! the charge is exactly what `y` explicit iterations would have cost. This
//! is what makes towers like `3^3^3` evaluable at all, since values can only
//! grow through successor steps.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::term::{Node, Term};
use crate::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedReason {
    /// Minimization over a body that provably ignores the search variable and
    /// is nonzero.
    NoRoot,
    /// The index or bit string does not decode to a closed term.
    InvalidProgram(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EvalOutcome {
    Value { value: Nat, steps: u64 },
    BudgetExhausted { steps: u64 },
    Undefined { reason: UndefinedReason, steps: u64 },
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Nat> {
        match self {
            EvalOutcome::Value { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            EvalOutcome::Value { steps, .. }
            | EvalOutcome::BudgetExhausted { steps }
            | EvalOutcome::Undefined { steps, .. } => *steps,
        }
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, EvalOutcome::BudgetExhausted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("term has arity {expected} but {found} arguments were supplied")]
    ArityMismatch { expected: usize, found: usize },
    #[error("step budget must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Use the closed form for successor-chain recursions.
    pub accelerate: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { accelerate: true }
    }
}

enum Halt {
    Exhausted,
    NoRoot,
}

struct Machine {
    budget: u64,
    used: u64,
    accelerate: bool,
}

impl Machine {
    #[inline]
    fn charge(&mut self, n: u64) -> Result<(), Halt> {
        if n > self.budget - self.used {
            self.used = self.budget;
            Err(Halt::Exhausted)
        } else {
            self.used += n;
            Ok(())
        }
    }

    fn run(&mut self, t: &Term, args: &[Nat]) -> Result<Nat, Halt> {
        self.charge(1)?;
        match t.node() {
            Node::Const(k) => Ok(k.clone()),
            Node::Succ => {
                self.charge(1)?;
                Ok(args[0].succ())
            }
            Node::Proj { index, .. } => Ok(args[index - 1].clone()),
            Node::Compose { outer, inners } => {
                let mut mid = Vec::with_capacity(inners.len());
                for inner in inners {
                    mid.push(self.run(inner, args)?);
                }
                self.run(outer, &mid)
            }
            Node::PrimRec { base, step } => {
                let (xs, y) = args.split_at(args.len() - 1);
                let y = &y[0];
                let acc = self.run(base, xs)?;
                if self.accelerate {
                    if let Some(j) = step.successor_chain() {
                        let per_iter = 1 + 3 * j;
                        let cost = y.to_u64().and_then(|y| y.checked_mul(per_iter));
                        match cost {
                            Some(c) => self.charge(c)?,
                            None => {
                                self.used = self.budget;
                                return Err(Halt::Exhausted);
                            }
                        }
                        return Ok(acc.add_scaled(j, y));
                    }
                }
                let k = xs.len();
                let mut buf = Vec::with_capacity(k + 2);
                buf.extend_from_slice(xs);
                buf.push(Nat::ZERO);
                buf.push(acc);
                // A counter beyond u64 can never be reached within a u64 budget.
                let limit = y.to_u64().unwrap_or(u64::MAX);
                for counter in 0..limit {
                    buf[k] = Nat::Small(counter);
                    let next = self.run(step, &buf)?;
                    buf[k + 1] = next;
                }
                Ok(buf.pop().expect("accumulator"))
            }
            Node::Mu { body } => {
                let mut buf = Vec::with_capacity(args.len() + 1);
                buf.extend_from_slice(args);
                buf.push(Nat::ZERO);
                let last = args.len();
                let mut z: u64 = 1;
                loop {
                    self.charge(1)?;
                    buf[last] = Nat::Small(z);
                    if self.run(body, &buf)?.is_zero() {
                        return Ok(Nat::Small(z));
                    }
                    if z == 1 && !body.may_use_last() {
                        return Err(Halt::NoRoot);
                    }
                    z += 1;
                }
            }
        }
    }
}

/// Evaluates `t` on `args` with at most `budget` steps.
pub fn eval(t: &Term, args: &[Nat], budget: u64) -> Result<EvalOutcome, EvalError> {
    eval_with(t, args, budget, EvalOptions::default())
}

pub fn eval_with(
    t: &Term,
    args: &[Nat],
    budget: u64,
    options: EvalOptions,
) -> Result<EvalOutcome, EvalError> {
    if args.len() != t.arity() {
        return Err(EvalError::ArityMismatch {
            expected: t.arity(),
            found: args.len(),
        });
    }
    if budget == 0 {
        return Err(EvalError::ZeroBudget);
    }
    let mut m = Machine {
        budget,
        used: 0,
        accelerate: options.accelerate,
    };
    Ok(match m.run(t, args) {
        Ok(value) => EvalOutcome::Value {
            value,
            steps: m.used,
        },
        Err(Halt::Exhausted) => EvalOutcome::BudgetExhausted { steps: budget },
        Err(Halt::NoRoot) => EvalOutcome::Undefined {
            reason: UndefinedReason::NoRoot,
            steps: m.used,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recfun::{library, parse_term};

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn successor_of_41() {
        let out = eval(&Term::succ(), &[n(41)], 10).unwrap();
        assert_eq!(
            out,
            EvalOutcome::Value {
                value: n(42),
                steps: 2
            }
        );
    }

    #[test]
    fn least_root_of_square_equation() {
        // body(y, x) = |x·x − y|
        let out = eval(&library::int_sqrt_exact(), &[n(9)], 10_000).unwrap();
        assert_eq!(out.value(), Some(&n(3)));
        // brute-force scan x = 1..9 for the least root of x² = 9
        let least = (1..=9u64).find(|x| x * x == 9).unwrap();
        assert_eq!(least, 3);
    }

    #[test]
    fn rootless_search_exhausts_budget() {
        // body(y, x) = x + 1 depends on x but is never zero
        let t = parse_term("M[C[S; P(2,2)]]").unwrap();
        let out = eval(&t, &[n(2)], 100).unwrap();
        assert_eq!(out, EvalOutcome::BudgetExhausted { steps: 100 });
    }

    #[test]
    fn independent_nonzero_body_is_undefined() {
        let t = parse_term("M[C[S; P(1,2)]]").unwrap();
        let out = eval(&t, &[n(2)], 100).unwrap();
        assert!(matches!(
            out,
            EvalOutcome::Undefined {
                reason: UndefinedReason::NoRoot,
                ..
            }
        ));
    }

    #[test]
    fn argument_errors() {
        assert_eq!(
            eval(&Term::succ(), &[], 10),
            Err(EvalError::ArityMismatch {
                expected: 1,
                found: 0
            })
        );
        assert_eq!(eval(&Term::succ(), &[n(0)], 0), Err(EvalError::ZeroBudget));
    }

    #[test]
    fn step_accounting() {
        // C[S; P(1,1)] = C visit + P visit + S visit + increment
        let t = parse_term("C[S; P(1,1)]").unwrap();
        assert_eq!(eval(&t, &[n(0)], 100).unwrap().steps(), 4);
        assert!(eval(&t, &[n(0)], 3).unwrap().is_exhausted());
        // M visit, probe, R visit, Z visit, one step iteration (P visit)
        let t = parse_term("M[R[Z(0); P(1,2)]]").unwrap();
        assert_eq!(
            eval(&t, &[], 100).unwrap(),
            EvalOutcome::Value {
                value: n(1),
                steps: 5
            }
        );
    }

    #[test]
    fn acceleration_is_cost_exact() {
        let add = library::add();
        for (x, y) in [(0u64, 0u64), (3, 5), (10, 1), (0, 17)] {
            let fast = eval_with(
                &add,
                &[n(x), n(y)],
                10_000,
                EvalOptions { accelerate: true },
            )
            .unwrap();
            let slow = eval_with(
                &add,
                &[n(x), n(y)],
                10_000,
                EvalOptions { accelerate: false },
            )
            .unwrap();
            assert_eq!(fast, slow);
            assert_eq!(fast.value(), Some(&n(x + y)));
        }
        // exhaustion happens at the same budgets
        let need = eval(&add, &[n(2), n(6)], 10_000).unwrap().steps();
        for b in [need - 1, need, need + 1] {
            let fast = eval_with(&add, &[n(2), n(6)], b, EvalOptions { accelerate: true }).unwrap();
            let slow =
                eval_with(&add, &[n(2), n(6)], b, EvalOptions { accelerate: false }).unwrap();
            assert_eq!(fast, slow, "budget {b}");
        }
    }
}
