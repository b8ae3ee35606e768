//! Lower approximations of the a priori (Levin) semimeasure over the program
//! enumeration, with peak and background diagnostics.
//!
//! The program code is prefix-free, so the total mass of any truncation obeys
//! Kraft's inequality. Masses are accumulated as exact dyadic rationals, which
//! makes the table independent of how the program space is split across
//! workers.

mod dyadic;
mod peaks;
mod table;

pub use dyadic::{Dyadic, MAX_LOG2_DEN};
pub use peaks::{
    background_fit, default_candidates, fit_points, peak_ratio, peak_report, window_stats,
    BackgroundFit, FitError, PeakReport, Weight, Window, WindowStats, MIN_FIT_POINTS,
};
pub use table::{
    apriori_prob, enumerate_semimeasure, read_jsonl, AprioriError, SemimeasureTable, Shard,
    CHECKPOINT_FORMAT, CHECKPOINT_VERSION, MAX_PROGRAM_BITS,
};
