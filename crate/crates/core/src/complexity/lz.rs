//! LZ78 as a computable upper bound on the description length of bytes.
//!
//! Layout: `gamma(len + 1)` header, then one record per phrase: the parent
//! dictionary index in `bit_len(i)` bits for phrase number `i`, followed by
//! an 8-bit literal unless the phrase ends exactly at the end of input.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{gamma_len, BitReader, Bits};
use crate::Nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phrase {
    /// Dictionary entry extended by this phrase (0 = empty string).
    pub parent: u32,
    pub literal: Option<u8>,
}

fn index_width(phrase_no: usize) -> u32 {
    usize::BITS - phrase_no.leading_zeros()
}

pub fn lz78_parse(data: &[u8]) -> Vec<Phrase> {
    let mut dict: HashMap<(u32, u8), u32> = HashMap::new();
    let mut phrases = Vec::new();
    let mut node = 0u32;
    for &b in data {
        match dict.get(&(node, b)) {
            Some(&next) => node = next,
            None => {
                phrases.push(Phrase {
                    parent: node,
                    literal: Some(b),
                });
                dict.insert((node, b), phrases.len() as u32);
                node = 0;
            }
        }
    }
    if node != 0 {
        phrases.push(Phrase {
            parent: node,
            literal: None,
        });
    }
    phrases
}

pub fn lz78_expand(phrases: &[Phrase]) -> Vec<u8> {
    // entry i (1-based) = (parent, literal)
    let mut entries: Vec<(u32, u8)> = vec![(0, 0)];
    let mut out = Vec::new();
    let mut scratch = Vec::new();
    for p in phrases {
        scratch.clear();
        let mut node = p.parent;
        while node != 0 {
            let (parent, b) = entries[node as usize];
            scratch.push(b);
            node = parent;
        }
        out.extend(scratch.iter().rev());
        if let Some(b) = p.literal {
            out.push(b);
            entries.push((p.parent, b));
        }
    }
    out
}

pub fn lz78_encode(data: &[u8]) -> Bits {
    let mut bits = Bits::new();
    bits.push_gamma(&Nat::from(data.len()).succ());
    for (i, p) in lz78_parse(data).iter().enumerate() {
        bits.push_uint(u64::from(p.parent), index_width(i));
        if let Some(b) = p.literal {
            bits.push_uint(u64::from(b), 8);
        }
    }
    bits
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LzError {
    #[error("stream ends early")]
    Truncated,
    #[error("phrase {phrase} refers to unknown entry {parent}")]
    BadParent { phrase: usize, parent: u64 },
    #[error("{0} bits remain after the last phrase")]
    Trailing(usize),
}

pub fn lz78_decode(bits: &Bits) -> Result<Vec<u8>, LzError> {
    let mut r = BitReader::new(bits);
    let total = r
        .read_gamma()
        .and_then(|n| n.monus(&Nat::ONE).to_u64())
        .ok_or(LzError::Truncated)? as usize;
    let mut lens: Vec<usize> = vec![0];
    let mut phrases = Vec::new();
    let mut produced = 0usize;
    while produced < total {
        let i = phrases.len();
        let parent = r.read_uint(index_width(i)).ok_or(LzError::Truncated)?;
        if parent as usize >= lens.len() {
            return Err(LzError::BadParent { phrase: i, parent });
        }
        let plen = lens[parent as usize];
        let literal = if produced + plen == total {
            None
        } else {
            Some(r.read_uint(8).ok_or(LzError::Truncated)? as u8)
        };
        produced += plen + usize::from(literal.is_some());
        if literal.is_some() {
            lens.push(plen + 1);
        }
        phrases.push(Phrase {
            parent: parent as u32,
            literal,
        });
    }
    if r.remaining() > 0 {
        return Err(LzError::Trailing(r.remaining()));
    }
    Ok(lz78_expand(&phrases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LzBound {
    pub input_bytes: u64,
    pub raw_bits: u64,
    pub phrases: u64,
    pub header_bits: u64,
    pub payload_bits: u64,
    pub total_bits: u64,
    /// `total_bits / raw_bits` (0 for empty input).
    pub ratio: f64,
}

/// Bit length of the self-contained LZ78 encoding of `data`.
pub fn lz_upper_bound(data: &[u8]) -> LzBound {
    let header_bits = gamma_len(&Nat::from(data.len()).succ()) as u64;
    let phrases = lz78_parse(data);
    let payload_bits: u64 = phrases
        .iter()
        .enumerate()
        .map(|(i, p)| u64::from(index_width(i)) + if p.literal.is_some() { 8 } else { 0 })
        .sum();
    let raw_bits = 8 * data.len() as u64;
    let total_bits = header_bits + payload_bits;
    LzBound {
        input_bytes: data.len() as u64,
        raw_bits,
        phrases: phrases.len() as u64,
        header_bits,
        payload_bits,
        total_bits,
        ratio: if raw_bits == 0 {
            0.0
        } else {
            total_bits as f64 / raw_bits as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn empty_input_is_header_only() {
        let b = lz_upper_bound(b"");
        assert_eq!(b.payload_bits, 0);
        assert_eq!(b.header_bits, 1);
        assert_eq!(lz78_decode(&lz78_encode(b"")).unwrap(), b"");
    }

    #[test]
    fn textbook_parse() {
        // A|B|AB|C|BA|BC|ABC
        let p = lz78_parse(b"ABABCBABCABC");
        let shown: Vec<(u32, Option<u8>)> = p.iter().map(|p| (p.parent, p.literal)).collect();
        assert_eq!(
            shown,
            vec![
                (0, Some(b'A')),
                (0, Some(b'B')),
                (1, Some(b'B')),
                (0, Some(b'C')),
                (2, Some(b'A')),
                (2, Some(b'C')),
                (3, Some(b'C')),
            ]
        );
    }

    #[test]
    fn trailing_partial_phrase() {
        let data = b"AAAA"; // A|AA|A(no literal)
        let p = lz78_parse(data);
        assert_eq!(p.last().unwrap().literal, None);
        assert_eq!(lz78_decode(&lz78_encode(data)).unwrap(), data);
    }

    #[test]
    fn repetitive_input_compresses() {
        let data = vec![0x41u8; 10_000];
        let b = lz_upper_bound(&data);
        assert!(b.total_bits as f64 <= 0.05 * 80_000.0, "{b:?}");
        assert_eq!(lz78_encode(&data).len() as u64, b.total_bits);
    }

    #[test]
    fn random_input_does_not() {
        let mut rng = rand_pcg::Pcg64::seed_from_u64(7);
        let data: Vec<u8> = (0..10_000).map(|_| rng.random()).collect();
        let b = lz_upper_bound(&data);
        assert!(b.total_bits as f64 >= 0.95 * 80_000.0, "{b:?}");
        assert_eq!(lz78_decode(&lz78_encode(&data)).unwrap(), data);
    }

    #[test]
    fn corrupt_streams() {
        let mut bits = lz78_encode(b"hello");
        bits.push(true);
        assert_eq!(lz78_decode(&bits), Err(LzError::Trailing(1)));
        let short = Bits::from_binary_str("00101").unwrap(); // len 4, no phrases
        assert_eq!(lz78_decode(&short), Err(LzError::Truncated));
    }

    proptest! {
        #[test]
        fn round_trip(data in proptest::collection::vec(any::<u8>(), 0..400)) {
            let bits = lz78_encode(&data);
            prop_assert_eq!(bits.len() as u64, lz_upper_bound(&data).total_bits);
            prop_assert_eq!(lz78_decode(&bits).unwrap(), data);
        }

        #[test]
        fn round_trip_small_alphabet(data in proptest::collection::vec(0u8..3, 0..600)) {
            prop_assert_eq!(lz78_expand(&lz78_parse(&data)), data.clone());
            prop_assert_eq!(lz78_decode(&lz78_encode(&data)).unwrap(), data);
        }
    }
}
