//! Bit-exact, prefix-free encoding of closed terms.
//!
//! Node tags are three bits (`Z=000 S=001 P=010 C=011 R=100 M=101`; `110`
//! and `111` are invalid) and every natural inside a node is Elias-gamma
//! coded, shifted by one where zero is allowed. A program is a bit string
//! that decodes to exactly one closed term with nothing left over, which
//! makes the set of valid programs prefix-free. Positive integers `m` are
//! identified with bit strings by dropping the leading `1` of their binary
//! expansion, so `m = 1` is the (invalid) empty program.

mod bits;
mod program;
mod space;

use sha2::{Digest, Sha256};

pub use bits::{gamma_len, BitReader, Bits, BitsError, BitsJson};
pub use program::{
    decode_program, decode_term, encode_term, encoded_len, run_index, run_index_u64, run_program,
    DecodeError, Program, ProgramInfo, LAYOUT,
};
pub use space::{programs_up_to, ProgramCounts, TermGenerator};

/// Short hash of the layout table. Complexity values from two builds are
/// comparable only when their hashes agree.
pub fn layout_hash() -> String {
    let digest = Sha256::digest(LAYOUT.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
