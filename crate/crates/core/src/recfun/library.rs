//! Standard arithmetic written in the calculus.
//!
//! Recursion always runs on the last argument. Argument orders are chosen so
//! that every inner loop is a successor chain, which the evaluator collapses.

use super::term::Term;

fn p(i: usize, a: usize) -> Term {
    Term::proj(i, a).expect("static projection")
}

fn c(outer: Term, inners: Vec<Term>) -> Term {
    Term::compose(outer, inners).expect("static composition")
}

fn r(base: Term, step: Term) -> Term {
    Term::prim_rec(base, step).expect("static recursion")
}

/// `add(x, y) = x + y`
pub fn add() -> Term {
    r(p(1, 1), c(Term::succ(), vec![p(3, 3)]))
}

/// The arity-1 zero function.
pub fn zero1() -> Term {
    r(Term::constant(0u64), p(2, 2))
}

/// The arity-1 constant one.
pub fn one1() -> Term {
    c(Term::succ(), vec![zero1()])
}

/// `mult(x, y) = x · y`, iterating `y` times.
pub fn mult() -> Term {
    r(zero1(), c(add(), vec![p(3, 3), p(1, 3)]))
}

/// `exp(b, e) = b^e`, iterating `e · b` times.
pub fn exp() -> Term {
    r(one1(), c(mult(), vec![p(3, 3), p(1, 3)]))
}

/// `tet(b, k) = b^b^...^b` (`k` copies), with `tet(b, 0) = 1`.
pub fn tetration() -> Term {
    r(one1(), c(exp(), vec![p(1, 3), p(3, 3)]))
}

/// `pred(y) = max(y - 1, 0)`
pub fn pred() -> Term {
    r(Term::constant(0u64), p(1, 2))
}

/// `monus(x, y) = max(x - y, 0)`
pub fn monus() -> Term {
    r(p(1, 1), c(pred(), vec![p(3, 3)]))
}

/// `absdiff(x, y) = |x - y|`
pub fn absdiff() -> Term {
    c(
        add(),
        vec![
            c(monus(), vec![p(1, 2), p(2, 2)]),
            c(monus(), vec![p(2, 2), p(1, 2)]),
        ],
    )
}

/// `y ↦ least x ≥ 1 with x² = y`, undefined when `y` is not a square.
pub fn int_sqrt_exact() -> Term {
    let square_x = c(mult(), vec![p(2, 2), p(2, 2)]);
    Term::mu(c(absdiff(), vec![square_x, p(1, 2)])).expect("static minimization")
}

/// `2^y` by iterated doubling.
pub fn pow2() -> Term {
    let double = r(
        Term::constant(0u64),
        c(Term::succ(), vec![c(Term::succ(), vec![p(2, 2)])]),
    );
    r(Term::constant(1u64), c(double, vec![p(2, 2)]))
}
