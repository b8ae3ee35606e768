//! The data-mining trap: a population is split into groups that are truly
//! irrelevant to every outcome, and each (group, outcome) pair is tested
//! anyway. Nominal significance appears at the rate alpha; a multiplicity
//! correction removes it.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stats::{ks_uniform, two_proportion, KsResult};
use crate::rng::{seeded, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    /// Pooled two-proportion z-test with Yates' continuity correction.
    Yates,
    /// The same test without the correction.
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRates {
    /// Each outcome's rate drawn log-uniformly from `[lo, hi]`.
    LogUniform {
        lo: f64,
        hi: f64,
    },
    Fixed(Vec<f64>),
}

impl Default for BaseRates {
    fn default() -> BaseRates {
        BaseRates::LogUniform { lo: 1e-4, hi: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    pub population: u64,
    pub groups: u32,
    pub outcomes: u32,
    #[serde(default)]
    pub base_rates: BaseRates,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default = "default_test")]
    pub test: TestKind,
}

fn default_test() -> TestKind {
    TestKind::Yates
}

impl ScanParams {
    pub fn new(population: u64, groups: u32, outcomes: u32, alpha: f64, seed: u64) -> ScanParams {
        ScanParams {
            population,
            groups,
            outcomes,
            base_rates: BaseRates::default(),
            alpha,
            seed,
            test: TestKind::Yates,
        }
    }

    pub fn validate(&self) -> Result<(), SpuriousError> {
        let bad = |m: String| Err(SpuriousError::Invalid(m));
        if self.groups == 0 || self.population < u64::from(self.groups) {
            return bad(format!(
                "need population >= groups >= 1, got {} and {}",
                self.population, self.groups
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        let in_unit = |r: f64| r > 0.0 && r < 1.0;
        match &self.base_rates {
            BaseRates::LogUniform { lo, hi } => {
                if !(in_unit(*lo) && in_unit(*hi) && lo <= hi) {
                    return bad(format!("base-rate range [{lo}, {hi}] must lie in (0, 1)"));
                }
            }
            BaseRates::Fixed(rates) => {
                if rates.len() != self.outcomes as usize {
                    return bad(format!(
                        "{} rates for {} outcomes",
                        rates.len(),
                        self.outcomes
                    ));
                }
                if let Some(r) = rates.iter().find(|r| !in_unit(**r)) {
                    return bad(format!("base rate {r} outside (0, 1)"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpuriousError {
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub group: u32,
    pub outcome: u32,
    pub group_size: u64,
    pub group_cases: u64,
    pub rest_cases: u64,
    pub p_value: f64,
    /// +1 if the group's rate exceeds the rest's, -1 if below, 0 if equal.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub params: ScanParams,
    pub group_sizes: Vec<u64>,
    pub rates: Vec<f64>,
    pub tests: u64,
    /// Groups without members (or without a comparison group); not tested.
    pub skipped_groups: Vec<u32>,
    pub corrected_alpha: f64,
    pub nominal_significant: u64,
    pub corrected_significant: u64,
    pub records: Vec<TestRecord>,
}

impl ScanResult {
    pub fn p_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.p_value)
    }
}

/// Runs one null study. Everything is derived from `params.seed`.
pub fn spurious_scan(params: &ScanParams) -> Result<ScanResult, SpuriousError> {
    params.validate()?;
    let mut result = ScanResult {
        params: params.clone(),
        group_sizes: Vec::new(),
        rates: Vec::new(),
        tests: 0,
        skipped_groups: Vec::new(),
        corrected_alpha: params.alpha,
        nominal_significant: 0,
        corrected_significant: 0,
        records: Vec::new(),
    };
    if params.groups < 2 {
        // nobody outside the only group to compare with
        return Ok(result);
    }
    let g = params.groups as usize;
    let mut rng = seeded(params.seed);
    let mut sizes = vec![0u64; g];
    for _ in 0..params.population {
        sizes[rng.random_range(0..g)] += 1;
    }
    let rates: Vec<f64> = match &params.base_rates {
        BaseRates::LogUniform { lo, hi } => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..params.outcomes)
                .map(|_| {
                    if a == b {
                        *lo
                    } else {
                        rng.random_range(a..=b).exp()
                    }
                })
                .collect()
        }
        BaseRates::Fixed(r) => r.clone(),
    };
    // cases[o][g]: per-individual Bernoulli draws, summed within each group
    let cases: Vec<Vec<u64>> = rates
        .par_iter()
        .enumerate()
        .map(|(o, &rate)| {
            let mut r = substream(params.seed, o as u64 + 1);
            sizes
                .iter()
                .map(|&n| Binomial::new(n, rate).expect("valid rate").sample(&mut r))
                .collect()
        })
        .collect();

    let testable: Vec<u32> = (0..params.groups)
        .filter(|&k| sizes[k as usize] > 0 && sizes[k as usize] < params.population)
        .collect();
    result.skipped_groups = (0..params.groups)
        .filter(|k| !testable.contains(k))
        .collect();
    let continuity = params.test == TestKind::Yates;
    for (o, row) in cases.iter().enumerate() {
        let total: u64 = row.iter().sum();
        for &k in &testable {
            let n1 = sizes[k as usize];
            let x1 = row[k as usize];
            let t = two_proportion(x1, n1, total - x1, params.population - n1, continuity);
            result.records.push(TestRecord {
                group: k,
                outcome: o as u32,
                group_size: n1,
                group_cases: x1,
                rest_cases: total - x1,
                p_value: t.p_value,
                direction: t.direction,
            });
        }
    }
    result.tests = result.records.len() as u64;
    result.corrected_alpha = params.alpha / result.tests.max(1) as f64;
    result.nominal_significant = result.p_values().filter(|&p| p < params.alpha).count() as u64;
    result.corrected_significant = result
        .p_values()
        .filter(|&p| p < result.corrected_alpha)
        .count() as u64;
    result.group_sizes = sizes;
    result.rates = rates;
    Ok(result)
}

/// Summary of many null studies against the Binomial(tests, alpha) oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub seeds: Vec<u64>,
    pub nominal_counts: Vec<u64>,
    pub corrected_counts: Vec<u64>,
    pub mean_nominal: f64,
    pub expected_nominal: f64,
    /// Standard deviation of Binomial(tests, alpha).
    pub binomial_sigma: f64,
    pub within_three_sigma: bool,
    pub corrected_zero_seeds: u64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// Repeats the scan for each seed (in parallel; results in seed order) and
/// pools the p-values for a uniformity check.
pub fn calibrate(params: &ScanParams, seeds: &[u64]) -> Result<Calibration, SpuriousError> {
    params.validate()?;
    let runs: Vec<ScanResult> = seeds
        .par_iter()
        .map(|&seed| {
            spurious_scan(&ScanParams {
                seed,
                ..params.clone()
            })
        })
        .collect::<Result<_, _>>()?;
    let tests = runs.first().map_or(0, |r| r.tests);
    let nominal: Vec<u64> = runs.iter().map(|r| r.nominal_significant).collect();
    let corrected: Vec<u64> = runs.iter().map(|r| r.corrected_significant).collect();
    let mean = nominal.iter().sum::<u64>() as f64 / nominal.len().max(1) as f64;
    let expected = tests as f64 * params.alpha;
    let sigma = (tests as f64 * params.alpha * (1.0 - params.alpha)).sqrt();
    let pooled: Vec<f64> = runs.iter().flat_map(|r| r.p_values()).collect();
    let KsResult {
        statistic, p_value, ..
    } = ks_uniform(&pooled);
    Ok(Calibration {
        seeds: seeds.to_vec(),
        within_three_sigma: (mean - expected).abs() <= 3.0 * sigma,
        corrected_zero_seeds: corrected.iter().filter(|&&c| c == 0).count() as u64,
        nominal_counts: nominal,
        corrected_counts: corrected,
        mean_nominal: mean,
        expected_nominal: expected,
        binomial_sigma: sigma,
        ks_statistic: statistic,
        ks_p_value: p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn austin(seed: u64) -> ScanParams {
        ScanParams::new(100_000, 12, 200, 0.05, seed)
    }

    #[test]
    fn shape_and_invariants() {
        let r = spurious_scan(&austin(42)).unwrap();
        assert_eq!(r.tests, 12 * 200);
        assert_eq!(r.group_sizes.iter().sum::<u64>(), 100_000);
        assert!(r.skipped_groups.is_empty());
        assert!(r.corrected_significant <= r.nominal_significant);
        let corrected: Vec<_> = r
            .records
            .iter()
            .filter(|t| t.p_value < r.corrected_alpha)
            .collect();
        assert!(corrected.iter().all(|t| t.p_value < 0.05));
        assert!(r.rates.iter().all(|&p| (1e-4..=1e-2).contains(&p)));
    }

    #[test]
    fn reproducible_from_seed() {
        let a = serde_json::to_string(&spurious_scan(&austin(7)).unwrap()).unwrap();
        let b = serde_json::to_string(&spurious_scan(&austin(7)).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = serde_json::to_string(&spurious_scan(&austin(8)).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_group_has_no_tests() {
        let r = spurious_scan(&ScanParams::new(1_000, 1, 200, 0.05, 1)).unwrap();
        assert_eq!(r.tests, 0);
        assert!(r.records.is_empty());
        assert_eq!(r.nominal_significant, 0);
    }

    #[test]
    fn empty_groups_are_skipped() {
        // 3 people in 40 groups: most groups are empty
        let r = spurious_scan(&ScanParams::new(40, 40, 5, 0.05, 3)).unwrap();
        assert!(!r.skipped_groups.is_empty());
        let members = 40 - r.skipped_groups.len() as u64;
        assert_eq!(r.tests, members * 5);
        assert!(r.records.iter().all(|t| t.group_size > 0));
    }

    #[test]
    fn validation() {
        let mut p = austin(1);
        p.alpha = 1.0;
        assert!(spurious_scan(&p).is_err());
        let mut p = austin(1);
        p.population = 5;
        assert!(spurious_scan(&p).is_err());
        let mut p = austin(1);
        p.base_rates = BaseRates::Fixed(vec![0.5; 3]);
        assert!(spurious_scan(&p).is_err());
        let mut p = austin(1);
        p.base_rates = BaseRates::LogUniform { lo: 0.0, hi: 0.1 };
        assert!(spurious_scan(&p).is_err());
        let json = r#"{"population": 10, "groups": 2, "outcomes": 1, "alpha": 0.05, "seed": 1, "colour": 1}"#;
        assert!(serde_json::from_str::<ScanParams>(json).is_err());
    }

    #[test]
    fn uncorrected_test_is_calibrated() {
        let mut p = austin(0);
        p.base_rates = BaseRates::LogUniform { lo: 1e-2, hi: 1e-1 };
        p.test = TestKind::Z;
        let seeds: Vec<u64> = (1000..1020).collect();
        let c = calibrate(&p, &seeds).unwrap();
        assert!(c.ks_p_value > 0.01, "KS p = {}", c.ks_p_value);
        assert!(c.within_three_sigma);
    }

    #[test]
    fn continuity_correction_is_conservative() {
        let mut p = austin(0);
        p.base_rates = BaseRates::LogUniform { lo: 1e-2, hi: 1e-1 };
        let seeds: Vec<u64> = (2000..2010).collect();
        let yates = calibrate(&p, &seeds).unwrap();
        p.test = TestKind::Z;
        let plain = calibrate(&p, &seeds).unwrap();
        assert!(yates.mean_nominal <= plain.mean_nominal);
        assert!(yates.mean_nominal <= yates.expected_nominal + 3.0 * yates.binomial_sigma);
    }
}
