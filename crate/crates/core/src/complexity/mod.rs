//! Budgeted, computable upper approximations of Kolmogorov complexity over
//! the program enumeration, plus LZ78 as a practical compressor bound.

mod census;
mod kolmogorov;
mod lz;
mod scan;
mod tower;

pub use census::{
    census, const_program_len, pigeonhole_holds, CensusReport, ConstWitnessSummary, ThresholdRow,
    MAX_CENSUS_BITS,
};
pub use kolmogorov::{
    k_exp, kolmogorov_order, length_complexity, ComplexityRecord, OrderEntry, OrderSegment,
    DEFAULT_M_MAX, DEFAULT_STEP_BUDGET,
};
pub use lz::{
    lz78_decode, lz78_encode, lz78_expand, lz78_parse, lz_upper_bound, LzBound, LzError, Phrase,
};
pub use scan::{evaluate_length, FirstHit, IndexScan, ScanStats};
pub use tower::{
    tower_lengths, tower_program, tower_reference, tower_value, TowerError, TowerLengths,
    MAX_EVALUATED_TOWER,
};

use crate::codec::encoded_len;
use crate::recfun::Term;

/// Description length of a function: the encoded length of a term computing it.
pub fn function_length(t: &Term) -> usize {
    encoded_len(t)
}
