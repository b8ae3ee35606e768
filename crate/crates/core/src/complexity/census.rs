//! Incompressibility census: most numbers have no program much shorter than
//! their positional notation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scan::{IndexScan, ScanStats};
use crate::codec::{encode_term, gamma_len, run_program};
use crate::recfun::Term;
use crate::Nat;

pub const MAX_CENSUS_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub log2_t: u32,
    pub t: u64,
    /// `|{x < 2^n_bits : k_value(x) ≤ t}|`
    pub count: u64,
    pub fraction: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstWitnessSummary {
    pub checked: u64,
    /// Every `Z(x)` program decodes and runs to `x`.
    pub all_run_to_value: bool,
    /// Every found `k_value(x)` is at most the index of `Z(x)`.
    pub k_at_most_const_index: bool,
    pub min_len: usize,
    pub max_len: usize,
    /// Extremes of `len(Z(x)) - 2·log₂x` over `1 ≤ x < 2^n_bits`.
    pub min_excess: f64,
    pub max_excess: f64,
    /// All lengths lie in `[2·log₂x − 2, 2·log₂x + 8]`.
    pub within_log_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n_bits: u32,
    pub step_budget: u64,
    /// Indices `1..=m_max` were scanned.
    pub m_max: u64,
    pub thresholds: Vec<ThresholdRow>,
    /// The pigeonhole bound checked at every integer threshold `T ≤ m_max`,
    /// over all objects found (not only those below `2^n_bits`).
    pub pigeonhole_all_thresholds: bool,
    pub objects_found: u64,
    pub const_witness: ConstWitnessSummary,
    pub stats: ScanStats,
}

/// Length of the positional-notation program `Z(x)`.
pub fn const_program_len(x: u64) -> usize {
    3 + gamma_len(&Nat::from(x).succ())
}

/// `true` iff for every `T`, at most `T` distinct objects have first index `≤ T`.
pub fn pigeonhole_holds(first_indices: &mut [u64]) -> bool {
    first_indices.sort_unstable();
    first_indices
        .iter()
        .enumerate()
        .all(|(i, &k)| (i as u64) < k)
}

pub fn census(n_bits: u32, budget: u64, max_threshold_log2: u32) -> CensusReport {
    assert!(
        n_bits <= MAX_CENSUS_BITS,
        "census is desk scale: n_bits <= 24"
    );
    assert!(max_threshold_log2 < 40);
    let m_max = 1u64 << max_threshold_log2;
    let mut scan = IndexScan::new(m_max, budget);
    scan.run();

    let limit = 1u64 << n_bits;
    let mut below: Vec<u64> = scan
        .first
        .iter()
        .filter(|(x, _)| x.to_u64().is_some_and(|v| v < limit))
        .map(|(_, h)| h.index)
        .collect();
    below.sort_unstable();
    let thresholds = (0..=max_threshold_log2)
        .map(|j| {
            let t = 1u64 << j;
            let count = below.partition_point(|&k| k <= t) as u64;
            ThresholdRow {
                log2_t: j,
                t,
                count,
                fraction: count as f64 / limit as f64,
                holds: count <= t,
            }
        })
        .collect();
    let mut all: Vec<u64> = scan.first.values().map(|h| h.index).collect();
    let pigeonhole_all_thresholds = pigeonhole_holds(&mut all);

    let const_witness = const_witnesses(n_bits, &scan);
    CensusReport {
        n_bits,
        step_budget: budget,
        m_max,
        thresholds,
        pigeonhole_all_thresholds,
        objects_found: scan.first.len() as u64,
        const_witness,
        stats: scan.stats,
    }
}

#[derive(Clone, Copy)]
struct WitnessAcc {
    ok: bool,
    k_ok: bool,
    min_len: usize,
    max_len: usize,
    min_excess: f64,
    max_excess: f64,
    in_bound: bool,
}

impl WitnessAcc {
    fn empty() -> WitnessAcc {
        WitnessAcc {
            ok: true,
            k_ok: true,
            min_len: usize::MAX,
            max_len: 0,
            min_excess: f64::INFINITY,
            max_excess: f64::NEG_INFINITY,
            in_bound: true,
        }
    }

    fn merge(self, o: WitnessAcc) -> WitnessAcc {
        WitnessAcc {
            ok: self.ok && o.ok,
            k_ok: self.k_ok && o.k_ok,
            min_len: self.min_len.min(o.min_len),
            max_len: self.max_len.max(o.max_len),
            min_excess: self.min_excess.min(o.min_excess),
            max_excess: self.max_excess.max(o.max_excess),
            in_bound: self.in_bound && o.in_bound,
        }
    }
}

fn const_witnesses(n_bits: u32, scan: &IndexScan) -> ConstWitnessSummary {
    let limit = 1u64 << n_bits;
    let acc = (0..limit)
        .into_par_iter()
        .fold(WitnessAcc::empty, |mut acc, x| {
            let p = encode_term(&Term::constant(x));
            let len = p.len();
            debug_assert_eq!(len, const_program_len(x));
            acc.ok &= run_program(&p, scan.step_budget).value() == Some(&Nat::from(x));
            if let Some(hit) = scan.first.get(&Nat::from(x)) {
                acc.k_ok &= p.index_u64().is_none_or(|m| hit.index <= m);
            }
            acc.min_len = acc.min_len.min(len);
            acc.max_len = acc.max_len.max(len);
            if x >= 1 {
                let two_log = 2.0 * (x as f64).log2();
                let excess = len as f64 - two_log;
                acc.min_excess = acc.min_excess.min(excess);
                acc.max_excess = acc.max_excess.max(excess);
                acc.in_bound &= (-2.0..=8.0).contains(&excess);
            }
            acc
        })
        .reduce(WitnessAcc::empty, WitnessAcc::merge);
    ConstWitnessSummary {
        checked: limit,
        all_run_to_value: acc.ok,
        k_at_most_const_index: acc.k_ok,
        min_len: acc.min_len,
        max_len: acc.max_len,
        min_excess: acc.min_excess,
        max_excess: acc.max_excess,
        within_log_bound: acc.in_bound,
    }
}
