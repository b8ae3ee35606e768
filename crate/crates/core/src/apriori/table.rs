use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Dyadic;
use crate::codec::TermGenerator;
use crate::complexity::ScanStats;
use crate::recfun::eval;
use crate::Nat;

pub const MAX_PROGRAM_BITS: u32 = 40;
pub const CHECKPOINT_FORMAT: &str = "kolmo-apriori-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AprioriError {
    #[error("total mass {total} exceeds 1 after programs of length {len}")]
    Kraft { len: usize, total: Dyadic },
    #[error("max program length {0} exceeds {MAX_PROGRAM_BITS}")]
    TooLong(u32),
    #[error("step budget must be positive")]
    ZeroBudget,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("table line {line}: {message}")]
    TableLine { line: usize, message: String },
}

/// Budgeted lower approximation of the a priori semimeasure: every program of
/// at most `max_bits` bits that halts within `step_budget` steps contributes
/// `2^-len` to the mass of its output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemimeasureTable {
    pub max_bits: u32,
    pub step_budget: u64,
    /// Lengths `0..lengths_done` are included.
    pub lengths_done: usize,
    pub mass: BTreeMap<Nat, Dyadic>,
    pub total: Dyadic,
    pub stats: ScanStats,
}

impl SemimeasureTable {
    pub fn new(max_bits: u32, step_budget: u64) -> Result<SemimeasureTable, AprioriError> {
        if max_bits > MAX_PROGRAM_BITS {
            return Err(AprioriError::TooLong(max_bits));
        }
        if step_budget == 0 {
            return Err(AprioriError::ZeroBudget);
        }
        Ok(SemimeasureTable {
            max_bits,
            step_budget,
            lengths_done: 0,
            mass: BTreeMap::new(),
            total: Dyadic::ZERO,
            stats: ScanStats::default(),
        })
    }

    pub fn is_complete(&self) -> bool {
        self.lengths_done > self.max_bits as usize
    }

    /// Adds every program of the next length; verifies Kraft afterwards.
    /// Returns `Ok(false)` once all lengths are done.
    pub fn advance(&mut self, gen: &mut TermGenerator) -> Result<bool, AprioriError> {
        if self.is_complete() {
            return Ok(false);
        }
        let len = self.lengths_done;
        let shard = shard_mass(gen, len, self.step_budget);
        self.merge_length(len, shard);
        self.lengths_done += 1;
        self.check_kraft(len)?;
        Ok(true)
    }

    fn merge_length(&mut self, len: usize, shard: Shard) {
        let mut outputs: Vec<(Nat, u64)> = shard.hits.into_iter().collect();
        outputs.sort_unstable();
        for (x, c) in outputs {
            let add = Dyadic::new(u128::from(c), len as u32).expect("len <= 40");
            *self.mass.entry(x).or_default() += add;
            self.total += add;
        }
        self.stats.evaluated += shard.stats.evaluated;
        self.stats.halted += shard.stats.halted;
        self.stats.exhausted += shard.stats.exhausted;
        self.stats.undefined += shard.stats.undefined;
    }

    fn check_kraft(&self, len: usize) -> Result<(), AprioriError> {
        if self.total > Dyadic::ONE {
            return Err(AprioriError::Kraft {
                len,
                total: self.total,
            });
        }
        Ok(())
    }

    /// Runs to completion, calling `on_checkpoint` after each length.
    pub fn run_with<F>(&mut self, mut on_checkpoint: F) -> Result<(), AprioriError>
    where
        F: FnMut(&SemimeasureTable) -> Result<(), AprioriError>,
    {
        let mut gen = TermGenerator::new(self.max_bits as usize);
        while self.advance(&mut gen)? {
            on_checkpoint(self)?;
        }
        Ok(())
    }

    pub fn prob(&self, x: &Nat) -> Dyadic {
        self.mass.get(x).copied().unwrap_or(Dyadic::ZERO)
    }

    /// Sorted JSON lines `{x, mass_num, mass_log2_den}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (x, m) in &self.mass {
            let line = TableLine {
                x: x.clone(),
                mass_num: m.numerator(),
                mass_log2_den: m.log2_den(),
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn to_checkpoint(&self) -> String {
        serde_json::to_string(&Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            table: self.clone(),
        })
        .expect("serializable")
    }

    pub fn from_checkpoint(text: &str) -> Result<SemimeasureTable, AprioriError> {
        let c: Checkpoint =
            serde_json::from_str(text).map_err(|e| AprioriError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(AprioriError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                c.format, c.version
            )));
        }
        Ok(c.table)
    }
}

/// Mass entries read back from JSON lines.
pub fn read_jsonl(text: &str) -> Result<BTreeMap<Nat, Dyadic>, AprioriError> {
    let mut mass = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |message: String| AprioriError::TableLine {
            line: i + 1,
            message,
        };
        let line: TableLine = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let m = Dyadic::new(line.mass_num, line.mass_log2_den)
            .ok_or_else(|| bad("denominator too large".into()))?;
        if mass.insert(line.x, m).is_some() {
            return Err(bad("duplicate x".into()));
        }
    }
    Ok(mass)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableLine {
    x: Nat,
    mass_num: u128,
    mass_log2_den: u32,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    table: SemimeasureTable,
}

/// Halting counts per output for one slice of the program space.
#[derive(Debug, Default)]
pub struct Shard {
    pub hits: HashMap<Nat, u64>,
    pub stats: ScanStats,
}

impl Shard {
    fn merge(mut self, other: Shard) -> Shard {
        for (x, c) in other.hits {
            *self.hits.entry(x).or_default() += c;
        }
        self.stats.evaluated += other.stats.evaluated;
        self.stats.halted += other.stats.halted;
        self.stats.exhausted += other.stats.exhausted;
        self.stats.undefined += other.stats.undefined;
        self
    }
}

fn shard_mass(gen: &mut TermGenerator, len: usize, budget: u64) -> Shard {
    let programs = gen.programs(len);
    programs
        .par_iter()
        .fold(Shard::default, |mut acc, (_, t)| {
            let out = eval(t, &[], budget).expect("closed term, positive budget");
            acc.stats.record(&out);
            if let Some(v) = out.value() {
                *acc.hits.entry(v.clone()).or_default() += 1;
            }
            acc
        })
        .reduce(Shard::default, Shard::merge)
}

/// Enumerates all programs of at most `max_bits` bits under `budget` steps.
pub fn enumerate_semimeasure(max_bits: u32, budget: u64) -> Result<SemimeasureTable, AprioriError> {
    let mut table = SemimeasureTable::new(max_bits, budget)?;
    table.run_with(|_| Ok(()))?;
    Ok(table)
}

pub fn apriori_prob(x: &Nat, table: &SemimeasureTable) -> Dyadic {
    table.prob(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_program, encoded_len, Bits, Program};
    use crate::complexity::k_exp;
    use crate::recfun::Term;

    /// Independent route: every bit string of each length, decoded and run.
    fn brute_force(max_bits: u32, budget: u64) -> BTreeMap<Nat, Dyadic> {
        let mut mass: BTreeMap<Nat, Dyadic> = BTreeMap::new();
        for len in 0..=max_bits as usize {
            for bits in Bits::all_of_length(len) {
                let p = Program { bits };
                let Ok(t) = decode_program(&p) else { continue };
                if let Some(v) = eval(&t, &[], budget).unwrap().value() {
                    *mass.entry(v.clone()).or_default() += Dyadic::pow2_neg(len as u32);
                }
            }
        }
        mass
    }

    #[test]
    fn matches_bit_string_enumeration() {
        for (l, t) in [(12, 100), (17, 50), (18, 1_000)] {
            let table = enumerate_semimeasure(l, t).unwrap();
            assert_eq!(table.mass, brute_force(l, t), "L={l} T={t}");
            let total = table.mass.values().fold(Dyadic::ZERO, |a, &b| a + b);
            assert_eq!(total, table.total);
        }
    }

    #[test]
    fn below_shortest_program_is_empty() {
        let table = enumerate_semimeasure(3, 100).unwrap();
        assert!(table.mass.is_empty());
        assert_eq!(table.total, Dyadic::ZERO);
    }

    #[test]
    fn explicit_witness_bound() {
        let table = enumerate_semimeasure(16, 1_000).unwrap();
        for x in 0..20u64 {
            let len = encoded_len(&Term::constant(x)) as u32;
            if len <= 16 {
                assert!(table.prob(&Nat::from(x)) >= Dyadic::pow2_neg(len), "x={x}");
            }
        }
        assert!(table.total <= Dyadic::ONE);
        assert_eq!(apriori_prob(&Nat::from(1u64 << 40), &table), Dyadic::ZERO);
        // every recorded mass is at least one program's worth
        assert!(table.mass.values().all(|m| *m >= Dyadic::pow2_neg(16)));
    }

    #[test]
    fn refinement_is_monotone() {
        let coarse = enumerate_semimeasure(14, 20).unwrap();
        let finer = [
            enumerate_semimeasure(14, 200).unwrap(),
            enumerate_semimeasure(17, 20).unwrap(),
            enumerate_semimeasure(17, 200).unwrap(),
        ];
        for f in &finer {
            assert!(coarse.mass.iter().all(|(x, m)| f.prob(x) >= *m));
            assert!(f.total >= coarse.total);
        }
    }

    #[test]
    fn consistent_with_index_scan() {
        let l = 14u32;
        let table = enumerate_semimeasure(l, 500).unwrap();
        for x in table.mass.keys() {
            let rec = k_exp(x, 500, 1 << (l + 1));
            assert!(rec.k_value.is_some_and(|k| k <= 1 << (l + 1)), "x={x}");
        }
    }

    #[test]
    fn checkpoint_resume_is_identical() {
        let full = enumerate_semimeasure(16, 300).unwrap();
        let mut part = SemimeasureTable::new(16, 300).unwrap();
        let mut gen = TermGenerator::new(16);
        for _ in 0..9 {
            part.advance(&mut gen).unwrap();
        }
        let saved = part.to_checkpoint();
        let mut resumed = SemimeasureTable::from_checkpoint(&saved).unwrap();
        resumed.run_with(|_| Ok(())).unwrap();
        assert_eq!(resumed, full);
        assert_eq!(resumed.to_jsonl(), full.to_jsonl());
    }

    #[test]
    fn jsonl_round_trip() {
        let table = enumerate_semimeasure(16, 300).unwrap();
        let text = table.to_jsonl();
        assert_eq!(read_jsonl(&text).unwrap(), table.mass);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with(r#"{"x":0,"mass_num":"#), "{first}");
        assert!(read_jsonl("{\"x\":1}").is_err());
        assert!(
            SemimeasureTable::from_checkpoint(r#"{"format":"x","version":1,"table":null}"#)
                .is_err()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            SemimeasureTable::new(41, 1),
            Err(AprioriError::TooLong(41))
        ));
        assert!(matches!(
            SemimeasureTable::new(10, 0),
            Err(AprioriError::ZeroBudget)
        ));
    }
}
