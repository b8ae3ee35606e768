//! Qualitative comparison of observed numeral frequencies with a priori
//! masses: rank agreement over the integers both sides have seen, and how
//! the candidate peaks look on either side.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::numerals::FrequencyTable;
use super::stats::spearman;
use crate::apriori::{peak_ratio, window_stats, Dyadic, Window};
use crate::Nat;

/// Fewest shared integers for a rank correlation to be reported.
pub const MIN_SHARED: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompareError {
    #[error("only {0} integers have both a count and a mass; need at least {MIN_SHARED}")]
    TooFewShared(usize),
    #[error("rank correlation undefined: one side is constant on the shared support")]
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakAlignment {
    pub x: Nat,
    pub count: u64,
    pub mass: f64,
    pub count_ratio: Option<f64>,
    pub mass_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub source: String,
    pub shared: usize,
    pub spearman: f64,
    pub peaks: Vec<PeakAlignment>,
    /// Always true: this is a rank-level illustration, not a fit.
    pub qualitative: bool,
}

pub fn compare_apriori(
    freq: &FrequencyTable,
    mass: &BTreeMap<Nat, Dyadic>,
    candidates: &[Nat],
    window: Window,
) -> Result<Comparison, CompareError> {
    let (counts, masses): (Vec<f64>, Vec<f64>) = freq
        .counts
        .iter()
        .filter_map(|(x, &c)| {
            mass.get(x)
                .filter(|m| !m.is_zero())
                .map(|m| (c as f64, m.to_f64()))
        })
        .filter(|&(c, _)| c > 0.0)
        .unzip();
    if counts.len() < MIN_SHARED {
        return Err(CompareError::TooFewShared(counts.len()));
    }
    let rho = spearman(&counts, &masses).ok_or(CompareError::Constant)?;
    let peaks = candidates
        .iter()
        .map(|x| {
            let count = freq.counts.get(x).copied().unwrap_or(0);
            let m = mass.get(x).map_or(0.0, Dyadic::to_f64);
            let v = x.to_u64();
            let ratio = |stats: Option<crate::apriori::WindowStats>, own: f64| {
                stats.map(|s| peak_ratio(own, s.median))
            };
            PeakAlignment {
                x: x.clone(),
                count,
                mass: m,
                count_ratio: ratio(
                    v.and_then(|v| window_stats(&freq.counts, v, window)),
                    count as f64,
                ),
                mass_ratio: ratio(v.and_then(|v| window_stats(mass, v, window)), m),
            }
        })
        .collect();
    Ok(Comparison {
        source: freq.source.clone(),
        shared: counts.len(),
        spearman: rho,
        peaks,
        qualitative: true,
    })
}
