//! Enumeration of the valid programs of a given length.
//!
//! Iterating over all `2^L` bit strings is hopeless beyond `L ≈ 30`, but the
//! valid programs are sparse (about 9·10⁴ of length ≤ 34). They are generated
//! directly from the grammar, bucketed by (arity, encoded length), and
//! sorted into index order.

use std::collections::HashMap;
use std::sync::Arc;

use super::bits::gamma_len;
use super::program::{encode_term, Program};
use crate::recfun::Term;
use crate::Nat;

fn g(v: usize) -> usize {
    gamma_len(&Nat::from(v))
}

/// Exact counts of well-formed terms by arity and encoded length.
pub struct ProgramCounts {
    max_len: usize,
    max_arity: usize,
    /// `terms[a][l]`
    terms: Vec<Vec<u128>>,
}

impl ProgramCounts {
    pub fn new(max_len: usize) -> ProgramCounts {
        // Each level of M or R nesting costs 3 bits and raises the required
        // arity by one; compositions need at least 4 bits per inner term.
        let max_arity = max_len + 1;
        let mut terms = vec![vec![0u128; max_len + 1]; max_arity + 2];
        // seqs[a][n][l]: ordered n-tuples of arity-a terms of total length l
        for l in 1..=max_len {
            for a in 0..=max_arity {
                let mut c = 0u128;
                if a == 0 && l >= 4 && (l - 4) % 2 == 0 {
                    c += 1u128 << ((l - 4) / 2);
                }
                if a == 1 && l == 3 {
                    c += 1;
                }
                if a >= 1 && 3 + 1 + g(a) <= l {
                    c += (1..=a).filter(|&i| 3 + g(i) + g(a) == l).count() as u128;
                }
                if l > 3 {
                    c += terms[a + 1][l - 3];
                }
                if a >= 1 && l > 3 {
                    for l1 in 1..l - 3 {
                        c += terms[a - 1][l1] * terms[a + 1][l - 3 - l1];
                    }
                }
                let mut n = 1;
                while 3 + g(n) < l && n <= max_arity {
                    let rem = l - 3 - g(n);
                    let seqs = Self::seq_counts(&terms[a], n, rem);
                    for l1 in 1..rem {
                        c += terms[n][l1] * seqs[rem - l1];
                    }
                    n += 1;
                }
                terms[a][l] = c;
            }
        }
        ProgramCounts {
            max_len,
            max_arity,
            terms,
        }
    }

    fn seq_counts(row: &[u128], n: usize, rem: usize) -> Vec<u128> {
        let mut acc = vec![0u128; rem + 1];
        acc[0] = 1;
        for _ in 0..n {
            let mut next = vec![0u128; rem + 1];
            for (x, &ax) in acc.iter().enumerate() {
                if ax == 0 {
                    continue;
                }
                for y in 1..=rem - x {
                    next[x + y] += ax * row[y];
                }
            }
            acc = next;
        }
        acc
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Number of well-formed terms of `arity` encoded in exactly `len` bits.
    pub fn terms(&self, arity: usize, len: usize) -> u128 {
        if arity > self.max_arity || len > self.max_len {
            return 0;
        }
        self.terms[arity][len]
    }

    /// Number of valid programs (closed terms) of exactly `len` bits.
    pub fn programs(&self, len: usize) -> u128 {
        self.terms(0, len)
    }
}

type Bucket = Arc<Vec<Term>>;
type Sequences = Arc<Vec<Vec<Term>>>;

/// Memoized generator of all well-formed terms by (arity, length).
pub struct TermGenerator {
    counts: ProgramCounts,
    memo: HashMap<(usize, usize), Bucket>,
    seq_memo: HashMap<(usize, usize, usize), Sequences>,
}

impl TermGenerator {
    pub fn new(max_len: usize) -> TermGenerator {
        TermGenerator {
            counts: ProgramCounts::new(max_len),
            memo: HashMap::new(),
            seq_memo: HashMap::new(),
        }
    }

    pub fn counts(&self) -> &ProgramCounts {
        &self.counts
    }

    /// Every well-formed term of `arity` whose encoding has exactly `len` bits.
    pub fn terms(&mut self, arity: usize, len: usize) -> Bucket {
        if self.counts.terms(arity, len) == 0 {
            return Arc::new(Vec::new());
        }
        if let Some(b) = self.memo.get(&(arity, len)) {
            return b.clone();
        }
        let mut out = Vec::new();
        if arity == 0 && len >= 4 && (len - 4).is_multiple_of(2) {
            let j = (len - 4) / 2;
            for k in (1u64 << j) - 1..(1u64 << (j + 1)) - 1 {
                out.push(Term::constant(k));
            }
        }
        if arity == 1 && len == 3 {
            out.push(Term::succ());
        }
        for i in 1..=arity {
            if 3 + g(i) + g(arity) == len {
                out.push(Term::proj(i, arity).expect("1 <= i <= a"));
            }
        }
        if len > 3 {
            for body in self.terms(arity + 1, len - 3).iter() {
                out.push(Term::mu(body.clone()).expect("body arity >= 1"));
            }
        }
        if arity >= 1 && len > 3 {
            for l1 in 1..len - 3 {
                let l2 = len - 3 - l1;
                if self.counts.terms(arity - 1, l1) == 0 || self.counts.terms(arity + 1, l2) == 0 {
                    continue;
                }
                let bases = self.terms(arity - 1, l1);
                let steps = self.terms(arity + 1, l2);
                for base in bases.iter() {
                    for step in steps.iter() {
                        out.push(Term::prim_rec(base.clone(), step.clone()).expect("arity rule"));
                    }
                }
            }
        }
        let mut n = 1;
        while 3 + g(n) < len && n <= self.counts.max_arity {
            let rem = len - 3 - g(n);
            for l1 in 1..rem {
                if self.counts.terms(n, l1) == 0 {
                    continue;
                }
                let seqs = self.seqs(arity, n, rem - l1);
                if seqs.is_empty() {
                    continue;
                }
                let outers = self.terms(n, l1);
                for outer in outers.iter() {
                    for seq in seqs.iter() {
                        out.push(Term::compose(outer.clone(), seq.clone()).expect("arity rule"));
                    }
                }
            }
            n += 1;
        }
        debug_assert_eq!(out.len() as u128, self.counts.terms(arity, len));
        let bucket = Arc::new(out);
        self.memo.insert((arity, len), bucket.clone());
        bucket
    }

    fn seqs(&mut self, arity: usize, n: usize, len: usize) -> Arc<Vec<Vec<Term>>> {
        if let Some(s) = self.seq_memo.get(&(arity, n, len)) {
            return s.clone();
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(self.terms(arity, len).iter().map(|t| vec![t.clone()]));
        } else {
            for l1 in 1..len {
                if self.counts.terms(arity, l1) == 0 {
                    continue;
                }
                let tails = self.seqs(arity, n - 1, len - l1);
                if tails.is_empty() {
                    continue;
                }
                for head in self.terms(arity, l1).iter() {
                    for tail in tails.iter() {
                        let mut v = Vec::with_capacity(n);
                        v.push(head.clone());
                        v.extend(tail.iter().cloned());
                        out.push(v);
                    }
                }
            }
        }
        let s = Arc::new(out);
        self.seq_memo.insert((arity, n, len), s.clone());
        s
    }

    /// Valid programs of exactly `len` bits, sorted by index.
    pub fn programs(&mut self, len: usize) -> Vec<(Program, Term)> {
        let mut out: Vec<(Program, Term)> = self
            .terms(0, len)
            .iter()
            .map(|t| (encode_term(t), t.clone()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Valid programs of length `≤ max_len`, in index order.
pub fn programs_up_to(max_len: usize) -> Vec<(Program, Term)> {
    let mut gen = TermGenerator::new(max_len);
    (0..=max_len).flat_map(|l| gen.programs(l)).collect()
}
