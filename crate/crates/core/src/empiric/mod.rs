//! Empirical side of the workbench: how often integers are mentioned in
//! text, and how easily null data yields "significant" findings.

mod compare;
mod numerals;
mod spurious;
mod stats;

pub use compare::{compare_apriori, CompareError, Comparison, PeakAlignment, MIN_SHARED};
pub use numerals::{extract_numbers, extract_with_source, FrequencyTable, MAX_NUMERAL};
pub use spurious::{
    calibrate, spurious_scan, BaseRates, Calibration, ScanParams, ScanResult, SpuriousError,
    TestKind, TestRecord,
};
pub use stats::{ks_uniform, normal_two_sided, spearman, two_proportion, KsResult, TwoProportion};
