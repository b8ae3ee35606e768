use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bits::{BitReader, Bits, BitsJson};
use crate::recfun::{eval, EvalOutcome, Node, Term, TermError, UndefinedReason};
use crate::Nat;

pub const TAG_CONST: u64 = 0b000;
pub const TAG_SUCC: u64 = 0b001;
pub const TAG_PROJ: u64 = 0b010;
pub const TAG_COMPOSE: u64 = 0b011;
pub const TAG_PRIMREC: u64 = 0b100;
pub const TAG_MU: u64 = 0b101;

/// Human-readable layout table; its hash identifies the decompressor.
pub const LAYOUT: &str = "\
kolmo term codec v1, MSB first
Z(k)           000 gamma(k+1)
S              001
P(i,a)         010 gamma(i) gamma(a)
C[f; g1..gn]   011 gamma(n) <f> <g1> ... <gn>
R[b; s]        100 <b> <s>
M[f]           101 <f>
110, 111       invalid
program        one closed term, no trailing bits
index m >= 1   binary expansion of m without its leading 1
";

/// A self-delimiting program for the fixed decompressor.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Program {
    pub bits: Bits,
}

impl Program {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The index `m` whose binary expansion is `1` followed by these bits.
    pub fn index(&self) -> BigUint {
        (BigUint::one() << self.bits.len()) | self.bits.to_biguint()
    }

    pub fn index_u64(&self) -> Option<u64> {
        self.index().to_u64()
    }

    /// Inverse of [`Program::index`]; `m = 1` is the empty program.
    pub fn from_index(m: &BigUint) -> Program {
        assert!(m.bits() > 0, "indices start at 1");
        let width = m.bits() - 1;
        let mut bits = Bits::new();
        for i in (0..width).rev() {
            bits.push(m.bit(i));
        }
        Program { bits }
    }

    pub fn from_index_u64(m: u64) -> Program {
        assert!(m >= 1, "indices start at 1");
        let width = 63 - m.leading_zeros();
        let mut bits = Bits::new();
        bits.push_uint(m, width);
        Program { bits }
    }

    pub fn to_json(&self) -> BitsJson {
        BitsJson::from(&self.bits)
    }
}

/// Serializable summary of a program: its bits, index, and source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramInfo {
    pub term: String,
    pub bits_hex: String,
    pub bit_len: usize,
    pub index: Nat,
}

impl ProgramInfo {
    pub fn new(term: &Term) -> ProgramInfo {
        let p = encode_term(term);
        let j = p.to_json();
        ProgramInfo {
            term: term.to_string(),
            bits_hex: j.bits_hex,
            bit_len: j.bit_len,
            index: Nat::from(p.index()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("empty program")]
    Empty,
    #[error("program ends in the middle of a node at bit {0}")]
    Truncated(usize),
    #[error("invalid tag {tag:03b} at bit {at}")]
    InvalidTag { at: usize, tag: u64 },
    #[error("field at bit {0} is too large")]
    FieldTooLarge(usize),
    #[error("ill-formed term at bit {at}: {source}")]
    IllFormed { at: usize, source: TermError },
    #[error("{trailing} bits remain after a complete term")]
    Trailing { trailing: usize },
    #[error("term has arity {0}; programs must be closed")]
    Open(usize),
}

fn write_term(t: &Term, out: &mut Bits) {
    match t.node() {
        Node::Const(k) => {
            out.push_uint(TAG_CONST, 3);
            out.push_gamma(&k.succ());
        }
        Node::Succ => out.push_uint(TAG_SUCC, 3),
        Node::Proj { index, arity } => {
            out.push_uint(TAG_PROJ, 3);
            out.push_gamma(&Nat::from(*index));
            out.push_gamma(&Nat::from(*arity));
        }
        Node::Compose { outer, inners } => {
            out.push_uint(TAG_COMPOSE, 3);
            out.push_gamma(&Nat::from(inners.len()));
            write_term(outer, out);
            for inner in inners {
                write_term(inner, out);
            }
        }
        Node::PrimRec { base, step } => {
            out.push_uint(TAG_PRIMREC, 3);
            write_term(base, out);
            write_term(step, out);
        }
        Node::Mu { body } => {
            out.push_uint(TAG_MU, 3);
            write_term(body, out);
        }
    }
}

/// Encodes any term (closed or not) into its bit layout.
pub fn encode_term(t: &Term) -> Program {
    let mut bits = Bits::new();
    write_term(t, &mut bits);
    Program { bits }
}

/// Encoded length in bits, without materializing the encoding.
pub fn encoded_len(t: &Term) -> usize {
    use super::bits::gamma_len;
    3 + match t.node() {
        Node::Const(k) => gamma_len(&k.succ()),
        Node::Succ => 0,
        Node::Proj { index, arity } => {
            gamma_len(&Nat::from(*index)) + gamma_len(&Nat::from(*arity))
        }
        Node::Compose { outer, inners } => {
            gamma_len(&Nat::from(inners.len()))
                + encoded_len(outer)
                + inners.iter().map(encoded_len).sum::<usize>()
        }
        Node::PrimRec { base, step } => encoded_len(base) + encoded_len(step),
        Node::Mu { body } => encoded_len(body),
    }
}

fn read_small(r: &mut BitReader<'_>) -> Result<usize, DecodeError> {
    let at = r.position();
    let v = r.read_gamma().ok_or(DecodeError::Truncated(r.position()))?;
    v.to_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or(DecodeError::FieldTooLarge(at))
}

fn read_term(r: &mut BitReader<'_>) -> Result<Term, DecodeError> {
    let at = r.position();
    let tag = r.read_uint(3).ok_or(DecodeError::Truncated(r.position()))?;
    let ill = |source| DecodeError::IllFormed { at, source };
    match tag {
        TAG_CONST => {
            let v = r.read_gamma().ok_or(DecodeError::Truncated(r.position()))?;
            Ok(Term::constant(v.monus(&Nat::ONE)))
        }
        TAG_SUCC => Ok(Term::succ()),
        TAG_PROJ => {
            let i = read_small(r)?;
            let a = read_small(r)?;
            Term::proj(i, a).map_err(ill)
        }
        TAG_COMPOSE => {
            let n = read_small(r)?;
            let outer = read_term(r)?;
            let mut inners = Vec::new();
            for _ in 0..n {
                inners.push(read_term(r)?);
            }
            Term::compose(outer, inners).map_err(ill)
        }
        TAG_PRIMREC => {
            let base = read_term(r)?;
            let step = read_term(r)?;
            Term::prim_rec(base, step).map_err(ill)
        }
        TAG_MU => {
            let body = read_term(r)?;
            Term::mu(body).map_err(ill)
        }
        tag => Err(DecodeError::InvalidTag { at, tag }),
    }
}

/// Decodes a complete term of any arity, rejecting trailing bits.
pub fn decode_term(bits: &Bits) -> Result<Term, DecodeError> {
    if bits.is_empty() {
        return Err(DecodeError::Empty);
    }
    let mut r = BitReader::new(bits);
    let t = read_term(&mut r)?;
    if r.remaining() > 0 {
        return Err(DecodeError::Trailing {
            trailing: r.remaining(),
        });
    }
    Ok(t)
}

/// Decodes a program: exactly one closed term consuming every bit.
pub fn decode_program(p: &Program) -> Result<Term, DecodeError> {
    let t = decode_term(&p.bits)?;
    if t.arity() != 0 {
        return Err(DecodeError::Open(t.arity()));
    }
    Ok(t)
}

/// The decompressor `u(m)`: decode the `m`-th program and run it.
pub fn run_index(m: &BigUint, budget: u64) -> EvalOutcome {
    run_program(&Program::from_index(m), budget)
}

pub fn run_index_u64(m: u64, budget: u64) -> EvalOutcome {
    run_program(&Program::from_index_u64(m), budget)
}

pub fn run_program(p: &Program, budget: u64) -> EvalOutcome {
    match decode_program(p) {
        Ok(t) => eval(&t, &[], budget.max(1)).expect("closed term, positive budget"),
        Err(e) => EvalOutcome::Undefined {
            reason: UndefinedReason::InvalidProgram(e.to_string()),
            steps: 0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recfun::parse_term;

    #[test]
    fn succ_is_a_bare_tag() {
        assert_eq!(encode_term(&Term::succ()).bits.to_string(), "001");
    }

    #[test]
    fn golden_layout() {
        let cases = [
            ("Z(0)", "0001"),
            ("Z(5)", "00000110"),
            ("P(1,1)", "01011"),
            ("P(2,3)", "010010011"),
            ("C[S; Z(0)]", "01110010001"),
            ("R[Z(0); P(2,2)]", "1000001010010010"),
            ("M[P(1,1)]", "10101011"),
        ];
        for (src, bits) in cases {
            let t = parse_term(src).unwrap();
            let p = encode_term(&t);
            assert_eq!(p.bits.to_string(), bits, "{src}");
            assert_eq!(encoded_len(&t), bits.len());
            assert_eq!(decode_term(&p.bits).unwrap(), t);
        }
    }

    #[test]
    fn empty_program_is_invalid() {
        assert_eq!(decode_program(&Program::default()), Err(DecodeError::Empty));
        assert!(matches!(
            run_index_u64(1, 100),
            EvalOutcome::Undefined {
                reason: UndefinedReason::InvalidProgram(_),
                ..
            }
        ));
    }

    #[test]
    fn compose_round_trip_is_closed() {
        let t = Term::compose(Term::succ(), vec![Term::constant(0u64)]).unwrap();
        let p = encode_term(&t);
        let back = decode_program(&p).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.arity(), 0);
    }

    #[test]
    fn appended_bit_is_trailing() {
        let p = encode_term(&parse_term("C[S; Z(3)]").unwrap());
        for extra in [false, true] {
            let mut q = p.clone();
            q.bits.push(extra);
            assert!(matches!(
                decode_program(&q),
                Err(DecodeError::Trailing { trailing: 1 })
            ));
        }
    }

    #[test]
    fn decode_rejections() {
        let b = |s: &str| Program {
            bits: Bits::from_binary_str(s).unwrap(),
        };
        assert!(matches!(
            decode_program(&b("110")),
            Err(DecodeError::InvalidTag { tag: 6, .. })
        ));
        assert!(matches!(
            decode_program(&b("111")),
            Err(DecodeError::InvalidTag { tag: 7, .. })
        ));
        assert!(matches!(
            decode_program(&b("00")),
            Err(DecodeError::Truncated(_))
        ));
        assert!(matches!(
            decode_program(&b("001")),
            Err(DecodeError::Open(1))
        ));
        // P(3,2)
        assert!(matches!(
            decode_program(&b("010011010")),
            Err(DecodeError::IllFormed { at: 0, .. })
        ));
    }

    #[test]
    fn index_of_z5_runs_to_5() {
        let p = encode_term(&Term::constant(5u64));
        let m = p.index();
        // reattach the leading 1 by hand
        let expected = u64::from_str_radix(&format!("1{}", p.bits), 2).unwrap();
        assert_eq!(m, BigUint::from(expected));
        assert_eq!(run_index(&m, 10).value(), Some(&Nat::from(5u64)));
    }

    #[test]
    fn rootless_index_exhausts() {
        // closed rootless search: M[C[S; P(1,1)]]
        let t = parse_term("M[C[S; P(1,1)]]").unwrap();
        let m = encode_term(&t).index();
        assert!(run_index(&m, 100).is_exhausted());
    }

    #[test]
    fn numbering_edges() {
        assert!(Program::from_index_u64(1).is_empty());
        assert_eq!(Program::from_index_u64(2).bits.to_string(), "0");
        assert_eq!(Program::from_index_u64(3).bits.to_string(), "1");
        assert_eq!(Program::from_index_u64(4).bits.to_string(), "00");
        let big = BigUint::from(u64::MAX) * 5u32;
        assert_eq!(Program::from_index(&big).index(), big);
    }
}
