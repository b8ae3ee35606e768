use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::Nat;

/// Constructor of a partial recursive function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// The constant `k`, arity 0.
    Const(Nat),
    /// `x ↦ x + 1`, arity 1.
    Succ,
    /// `(x_1, ..., x_arity) ↦ x_index`, with `1 ≤ index ≤ arity`.
    Proj { index: usize, arity: usize },
    /// `x ↦ outer(inner_1(x), ..., inner_n(x))`.
    Compose { outer: Term, inners: Vec<Term> },
    /// `f(x, 0) = base(x)`, `f(x, y + 1) = step(x, y, f(x, y))`.
    PrimRec { base: Term, step: Term },
    /// `x ↦ least z ≥ 1 with body(x, z) = 0`.
    Mu { body: Term },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("projection P({index},{arity}) needs 1 <= index <= arity")]
    ProjIndex { index: usize, arity: usize },
    #[error("composition needs at least one inner term")]
    ComposeEmpty,
    #[error("composition outer term has arity {outer_arity} but is given {inners} inner terms")]
    ComposeFanIn { outer_arity: usize, inners: usize },
    #[error("composition inner term #{position} ({term}) has arity {found}, expected {expected}")]
    ComposeInnerArity {
        position: usize,
        term: String,
        expected: usize,
        found: usize,
    },
    #[error("primitive recursion base {base} has arity {base_arity}, so step {step} needs arity {} (has {step_arity})", base_arity + 2)]
    PrimRecArity {
        base: String,
        step: String,
        base_arity: usize,
        step_arity: usize,
    },
    #[error("minimization body {body} has arity 0; it needs at least 1")]
    MuArity { body: String },
}

#[derive(PartialEq, Eq, Hash)]
struct TermData {
    node: Node,
    arity: usize,
    size: usize,
    /// `uses[i]` is false only if the function provably ignores argument `i`.
    uses: Vec<bool>,
    /// `Some(j)` if the term is `S^j ∘ P(arity, arity)`.
    last_chain: Option<u64>,
}

/// A well-formed partial recursive function term.
///
/// Terms are immutable and cheaply clonable. Ill-formed terms cannot be
/// built: every constructor checks the arity rules and caches the result.
#[derive(Clone)]
pub struct Term(Arc<TermData>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl Term {
    fn build(node: Node, arity: usize, uses: Vec<bool>, last_chain: Option<u64>) -> Term {
        let size = 1 + match &node {
            Node::Const(_) | Node::Succ | Node::Proj { .. } => 0,
            Node::Compose { outer, inners } => {
                outer.size() + inners.iter().map(Term::size).sum::<usize>()
            }
            Node::PrimRec { base, step } => base.size() + step.size(),
            Node::Mu { body } => body.size(),
        };
        Term(Arc::new(TermData {
            node,
            arity,
            size,
            uses,
            last_chain,
        }))
    }

    pub fn constant(k: impl Into<Nat>) -> Term {
        Term::build(Node::Const(k.into()), 0, Vec::new(), None)
    }

    pub fn succ() -> Term {
        Term::build(Node::Succ, 1, vec![true], None)
    }

    pub fn proj(index: usize, arity: usize) -> Result<Term, TermError> {
        if index == 0 || index > arity {
            return Err(TermError::ProjIndex { index, arity });
        }
        let mut uses = vec![false; arity];
        uses[index - 1] = true;
        let chain = (index == arity).then_some(0);
        Ok(Term::build(Node::Proj { index, arity }, arity, uses, chain))
    }

    pub fn compose(outer: Term, inners: Vec<Term>) -> Result<Term, TermError> {
        if inners.is_empty() {
            return Err(TermError::ComposeEmpty);
        }
        if outer.arity() != inners.len() {
            return Err(TermError::ComposeFanIn {
                outer_arity: outer.arity(),
                inners: inners.len(),
            });
        }
        let arity = inners[0].arity();
        for (position, inner) in inners.iter().enumerate() {
            if inner.arity() != arity {
                return Err(TermError::ComposeInnerArity {
                    position: position + 1,
                    term: inner.to_string(),
                    expected: arity,
                    found: inner.arity(),
                });
            }
        }
        let mut uses = vec![false; arity];
        for (inner, used) in inners.iter().zip(outer.uses()) {
            if *used {
                for (u, v) in uses.iter_mut().zip(inner.uses()) {
                    *u |= *v;
                }
            }
        }
        let chain = match (&outer.0.node, inners.as_slice()) {
            (Node::Succ, [inner]) => inner.0.last_chain.map(|j| j + 1),
            _ => None,
        };
        Ok(Term::build(
            Node::Compose { outer, inners },
            arity,
            uses,
            chain,
        ))
    }

    pub fn prim_rec(base: Term, step: Term) -> Result<Term, TermError> {
        let k = base.arity();
        if step.arity() != k + 2 {
            return Err(TermError::PrimRecArity {
                base: base.to_string(),
                step: step.to_string(),
                base_arity: k,
                step_arity: step.arity(),
            });
        }
        let mut uses: Vec<bool> = base
            .uses()
            .iter()
            .zip(step.uses())
            .map(|(a, b)| *a || *b)
            .collect();
        // the recursion variable decides how many steps run
        uses.push(true);
        Ok(Term::build(Node::PrimRec { base, step }, k + 1, uses, None))
    }

    pub fn mu(body: Term) -> Result<Term, TermError> {
        if body.arity() == 0 {
            return Err(TermError::MuArity {
                body: body.to_string(),
            });
        }
        let arity = body.arity() - 1;
        let uses = body.uses()[..arity].to_vec();
        Ok(Term::build(Node::Mu { body }, arity, uses, None))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of inputs `m` of the function `N^m → N`.
    pub fn arity(&self) -> usize {
        self.0.arity
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn uses(&self) -> &[bool] {
        &self.0.uses
    }

    /// Whether the value can depend on the last argument. `false` is a proof
    /// of independence; `true` is only a syntactic possibility.
    pub fn may_use_last(&self) -> bool {
        self.0.uses.last().copied().unwrap_or(false)
    }

    /// `Some(j)` when this term computes `x_last + j` via `S^j ∘ P(a, a)`.
    pub fn successor_chain(&self) -> Option<u64> {
        self.0.last_chain
    }

    pub fn is_closed(&self) -> bool {
        self.arity() == 0
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(k) => write!(f, "Z({k})"),
            Node::Succ => write!(f, "S"),
            Node::Proj { index, arity } => write!(f, "P({index},{arity})"),
            Node::Compose { outer, inners } => {
                write!(f, "C[{outer}; ")?;
                for (i, inner) in inners.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{inner}")?;
                }
                write!(f, "]")
            }
            Node::PrimRec { base, step } => write!(f, "R[{base}; {step}]"),
            Node::Mu { body } => write!(f, "M[{body}]"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_rules() {
        assert_eq!(Term::succ().arity(), 1);
        let zero1 = Term::prim_rec(Term::constant(0u64), Term::proj(2, 2).unwrap()).unwrap();
        assert_eq!(zero1.arity(), 1);
        let step3 = Term::proj(3, 3).unwrap();
        assert_eq!(Term::prim_rec(zero1, step3).unwrap().arity(), 2);
        let body2 = Term::proj(1, 2).unwrap();
        assert_eq!(Term::mu(body2).unwrap().arity(), 1);
        assert_eq!(Term::constant(7u64).arity(), 0);
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(
            Term::proj(3, 2).unwrap_err(),
            TermError::ProjIndex { index: 3, arity: 2 }
        );
        assert!(Term::proj(0, 2).is_err());
        assert!(matches!(
            Term::compose(Term::succ(), vec![]),
            Err(TermError::ComposeEmpty)
        ));
        assert!(matches!(
            Term::compose(
                Term::succ(),
                vec![Term::constant(1u64), Term::constant(2u64)]
            ),
            Err(TermError::ComposeFanIn { .. })
        ));
        let p = Term::proj(1, 2).unwrap();
        assert!(matches!(
            Term::compose(Term::proj(1, 2).unwrap(), vec![p, Term::constant(3u64)]),
            Err(TermError::ComposeInnerArity { position: 2, .. })
        ));
        assert!(matches!(
            Term::prim_rec(Term::constant(0u64), Term::succ()),
            Err(TermError::PrimRecArity { .. })
        ));
        assert!(matches!(
            Term::mu(Term::constant(0u64)),
            Err(TermError::MuArity { .. })
        ));
    }

    #[test]
    fn successor_chain_detection() {
        let p = Term::proj(3, 3).unwrap();
        assert_eq!(p.successor_chain(), Some(0));
        let s1 = Term::compose(Term::succ(), vec![p.clone()]).unwrap();
        assert_eq!(s1.successor_chain(), Some(1));
        let s2 = Term::compose(Term::succ(), vec![s1]).unwrap();
        assert_eq!(s2.successor_chain(), Some(2));
        assert_eq!(Term::proj(2, 3).unwrap().successor_chain(), None);
    }

    #[test]
    fn usage_tracking() {
        // body(y, x) = y ignores x
        let body = Term::proj(1, 2).unwrap();
        assert!(!body.may_use_last());
        let body = Term::compose(Term::succ(), vec![Term::proj(2, 2).unwrap()]).unwrap();
        assert!(body.may_use_last());
        // outer ignores its second input, so the inner P(2,2) is dead
        let t = Term::compose(
            Term::proj(1, 2).unwrap(),
            vec![Term::proj(1, 2).unwrap(), Term::proj(2, 2).unwrap()],
        )
        .unwrap();
        assert_eq!(t.uses(), &[true, false]);
    }

    #[test]
    fn display_is_canonical() {
        let t = Term::compose(Term::succ(), vec![Term::proj(1, 2).unwrap()]).unwrap();
        assert_eq!(t.to_string(), "C[S; P(1,2)]");
        assert_eq!(t.size(), 3);
    }
}
