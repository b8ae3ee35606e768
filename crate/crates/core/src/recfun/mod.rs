//! Partial recursive functions over the naturals (zero included).
//!
//! Basic functions are constants `Z(k)` (arity 0), the successor `S`, and
//! projections `P(i,a)`; the operations are composition, primitive
//! recursion, and minimization. Minimization searches `z = 1, 2, ...` for the
//! least root of `body(x, z) = 0`, so an equation `f(x, z) = y` is written
//! with `|f(x, z) - y|` (see [`library::absdiff`]).

mod eval;
pub mod library;
mod parse;
mod term;

pub use eval::{eval, eval_with, EvalError, EvalOptions, EvalOutcome, UndefinedReason};
pub use parse::{parse_term, ParseError};
pub use term::{Node, Term, TermError};

/// The number of inputs of `t`.
pub fn arity(t: &Term) -> usize {
    t.arity()
}
