use serde::{Deserialize, Serialize};

use super::scan::{evaluate_length, IndexScan, ScanStats};
use crate::codec::{ProgramInfo, TermGenerator};
use crate::Nat;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000;
pub const DEFAULT_M_MAX: u64 = 1 << 22;

/// `floor(log2 k)`: the program length of the witness at index `k`.
pub fn length_complexity(k: u64) -> u32 {
    63 - k.leading_zeros()
}

/// A computable upper approximation of `K_u(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub x: Nat,
    /// Least index producing `x`, or `None` when no index `≤ m_max` does.
    pub k_value: Option<u64>,
    pub length_complexity: Option<u32>,
    pub exceeds_m_max: bool,
    pub witness: Option<ProgramInfo>,
    pub witness_steps: Option<u64>,
    pub step_budget: u64,
    pub m_max: u64,
}

/// Scans `m = 1..=m_max` and returns the least `m` with `u(m) = x` within
/// `budget` steps.
pub fn k_exp(x: &Nat, budget: u64, m_max: u64) -> ComplexityRecord {
    assert!(budget >= 1 && m_max >= 1);
    let scan = IndexScan::new(m_max, budget);
    let mut gen = TermGenerator::new(scan.max_len());
    for len in 0..=scan.max_len() {
        let hit = evaluate_length(&mut gen, len, budget, m_max)
            .into_iter()
            .find(|(_, _, out)| out.value() == Some(x));
        if let Some((m, t, out)) = hit {
            return ComplexityRecord {
                x: x.clone(),
                k_value: Some(m),
                length_complexity: Some(length_complexity(m)),
                exceeds_m_max: false,
                witness: Some(ProgramInfo::new(&t)),
                witness_steps: Some(out.steps()),
                step_budget: budget,
                m_max,
            };
        }
    }
    ComplexityRecord {
        x: x.clone(),
        k_value: None,
        length_complexity: None,
        exceeds_m_max: true,
        witness: None,
        witness_steps: None,
        step_budget: budget,
        m_max,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub rank: u64,
    pub x: Nat,
    pub k_value: u64,
    pub length_complexity: u32,
    pub witness: String,
}

/// Budgeted initial segment of the Kolmogorov order of the naturals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderSegment {
    /// Every object with a witness index `≤ n` is listed.
    pub n: u64,
    pub step_budget: u64,
    pub entries: Vec<OrderEntry>,
    pub stats: ScanStats,
}

impl OrderSegment {
    pub fn from_scan(scan: &IndexScan) -> OrderSegment {
        let mut entries: Vec<OrderEntry> = scan
            .first
            .iter()
            .map(|(x, hit)| OrderEntry {
                rank: 0,
                x: x.clone(),
                k_value: hit.index,
                length_complexity: length_complexity(hit.index),
                witness: hit.witness.clone(),
            })
            .collect();
        entries.sort_by(|a, b| (a.k_value, &a.x).cmp(&(b.k_value, &b.x)));
        for (i, e) in entries.iter_mut().enumerate() {
            e.rank = i as u64 + 1;
        }
        OrderSegment {
            n: scan.m_max,
            step_budget: scan.step_budget,
            entries,
            stats: scan.stats,
        }
    }

    /// 1-based position of `x`, if present.
    pub fn position(&self, x: &Nat) -> Option<u64> {
        self.entries.iter().find(|e| &e.x == x).map(|e| e.rank)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,x,k_value,length_complexity,witness\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},\"{}\"\n",
                e.rank, e.x, e.k_value, e.length_complexity, e.witness
            ));
        }
        out
    }
}

/// Runs `u(1), ..., u(n)` and sorts the objects found by `(k_value, x)`.
pub fn kolmogorov_order(n: u64, budget: u64) -> OrderSegment {
    let mut scan = IndexScan::new(n, budget);
    scan.run();
    OrderSegment::from_scan(&scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::run_index_u64;

    /// Independent route: decode every index one by one.
    fn naive_k(x: &Nat, budget: u64, m_max: u64) -> Option<u64> {
        (1..=m_max).find(|&m| run_index_u64(m, budget).value() == Some(x))
    }

    #[test]
    fn agrees_with_naive_scan() {
        let m_max = 1 << 14;
        for x in [0u64, 1, 2, 5, 7, 30, 31, 62, 200] {
            let x = Nat::from(x);
            let rec = k_exp(&x, 1_000, m_max);
            assert_eq!(rec.k_value, naive_k(&x, 1_000, m_max), "x={x}");
        }
    }

    #[test]
    fn smallest_valid_program_is_its_own_witness() {
        // the first valid index is Z(0) at 4 bits: m = 0b1_0001 = 17
        let m0 = (1..64u64)
            .find(|&m| run_index_u64(m, 100).value().is_some())
            .unwrap();
        assert_eq!(m0, 17);
        let rec = k_exp(&Nat::ZERO, 100, 1 << 10);
        assert_eq!(rec.k_value, Some(m0));
        assert_eq!(rec.length_complexity, Some(4));
        let w = rec.witness.unwrap();
        assert_eq!(w.term, "Z(0)");
        assert_eq!(run_index_u64(m0, 100).value(), Some(&Nat::ZERO));
    }

    #[test]
    fn larger_resources_never_raise_k() {
        for x in [3u64, 9, 40] {
            let x = Nat::from(x);
            let a = k_exp(&x, 50, 1 << 12);
            let b = k_exp(&x, 100, 1 << 12);
            let c = k_exp(&x, 100, 1 << 16);
            let key = |r: &ComplexityRecord| r.k_value.unwrap_or(u64::MAX);
            assert!(key(&b) <= key(&a));
            assert!(key(&c) <= key(&b));
        }
    }

    #[test]
    fn unreachable_object() {
        let rec = k_exp(&Nat::from(1_000_000u64), 100, 1 << 10);
        assert!(rec.exceeds_m_max);
        assert_eq!(rec.k_value, None);
    }

    #[test]
    fn order_of_single_index_is_empty() {
        let seg = kolmogorov_order(1, 100);
        assert!(seg.entries.is_empty());
        assert_eq!(seg.stats.evaluated, 0);
    }

    #[test]
    fn order_is_sorted_permutation() {
        let n = 1 << 16;
        let seg = kolmogorov_order(n, 1_000);
        assert!(seg
            .entries
            .windows(2)
            .all(|w| (w[0].k_value, &w[0].x) < (w[1].k_value, &w[1].x)));
        let mut xs: Vec<&Nat> = seg.entries.iter().map(|e| &e.x).collect();
        xs.sort();
        xs.dedup();
        assert_eq!(xs.len(), seg.entries.len());
        // exactly the objects some index <= n produces
        let mut expect = std::collections::BTreeSet::new();
        for m in 1..=n {
            if let Some(v) = run_index_u64(m, 1_000).value() {
                expect.insert(v.clone());
            }
        }
        let got: std::collections::BTreeSet<Nat> =
            seg.entries.iter().map(|e| e.x.clone()).collect();
        assert_eq!(got, expect);
        assert!(seg.entries.len() as u64 <= n);
    }
}
