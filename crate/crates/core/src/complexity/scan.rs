use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::TermGenerator;
use crate::recfun::{eval, EvalOutcome, Term};
use crate::Nat;

/// Counters over evaluated programs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStats {
    pub evaluated: u64,
    pub halted: u64,
    pub exhausted: u64,
    pub undefined: u64,
}

impl ScanStats {
    pub fn record(&mut self, outcome: &EvalOutcome) {
        self.evaluated += 1;
        match outcome {
            EvalOutcome::Value { .. } => self.halted += 1,
            EvalOutcome::BudgetExhausted { .. } => self.exhausted += 1,
            EvalOutcome::Undefined { .. } => self.undefined += 1,
        }
    }
}

/// Least index at which an object was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstHit {
    pub index: u64,
    pub witness: String,
    pub steps: u64,
}

/// Evaluates every valid program of exactly `len` bits (and index `≤ m_max`)
/// in index order. Work is spread over the current rayon pool; the returned
/// order does not depend on the pool size.
pub fn evaluate_length(
    gen: &mut TermGenerator,
    len: usize,
    budget: u64,
    m_max: u64,
) -> Vec<(u64, Term, EvalOutcome)> {
    assert!(len < 63, "indices must fit in u64");
    let programs = gen.programs(len);
    programs
        .par_iter()
        .map(|(p, t)| (p.index_u64().expect("len < 63"), t))
        .filter(|(m, _)| *m <= m_max)
        .map(|(m, t)| {
            let outcome = eval(t, &[], budget).expect("closed term, positive budget");
            (m, t.clone(), outcome)
        })
        .collect()
}

/// Resumable scan of `u(1), ..., u(m_max)` that keeps the first index
/// producing each object. Lengths are processed one at a time so that a scan
/// can be checkpointed between lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexScan {
    pub m_max: u64,
    pub step_budget: u64,
    /// Program lengths `0..next_len` are done.
    pub next_len: usize,
    pub first: BTreeMap<Nat, FirstHit>,
    pub stats: ScanStats,
}

impl IndexScan {
    pub fn new(m_max: u64, step_budget: u64) -> IndexScan {
        assert!(m_max >= 1 && step_budget >= 1);
        IndexScan {
            m_max,
            step_budget,
            next_len: 0,
            first: BTreeMap::new(),
            stats: ScanStats::default(),
        }
    }

    /// Longest program length that can have index `≤ m_max`.
    pub fn max_len(&self) -> usize {
        (63 - self.m_max.leading_zeros()) as usize
    }

    pub fn is_done(&self) -> bool {
        self.next_len > self.max_len()
    }

    /// Processes the next program length. Returns `false` when finished.
    pub fn advance(&mut self, gen: &mut TermGenerator) -> bool {
        if self.is_done() {
            return false;
        }
        let len = self.next_len;
        for (m, t, outcome) in evaluate_length(gen, len, self.step_budget, self.m_max) {
            self.stats.record(&outcome);
            if let EvalOutcome::Value { value, steps } = outcome {
                self.first.entry(value).or_insert_with(|| FirstHit {
                    index: m,
                    witness: t.to_string(),
                    steps,
                });
            }
        }
        self.next_len += 1;
        true
    }

    pub fn run(&mut self) {
        let mut gen = TermGenerator::new(self.max_len());
        while self.advance(&mut gen) {}
    }

    /// Objects ordered by first index.
    pub fn by_index(&self) -> Vec<(&Nat, &FirstHit)> {
        let mut v: Vec<_> = self.first.iter().collect();
        v.sort_by_key(|(_, h)| h.index);
        v
    }
}
