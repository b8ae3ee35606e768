use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Nat;

/// A finite bit string, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Bits {
        Bits(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit)
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Appends the low `width` bits of `v`, most significant first.
    pub fn push_uint(&mut self, v: u64, width: u32) {
        for i in (0..width).rev() {
            self.0.push((v >> i) & 1 == 1);
        }
    }

    /// Appends the Elias-gamma code of `v ≥ 1`: `⌊log₂v⌋` zeros followed by
    /// the binary expansion of `v`.
    pub fn push_gamma(&mut self, v: &Nat) {
        assert!(!v.is_zero(), "Elias gamma codes start at 1");
        let width = v.bit_len();
        for _ in 1..width {
            self.0.push(false);
        }
        match v {
            Nat::Small(x) => self.push_uint(*x, width as u32),
            Nat::Big(b) => {
                for i in (0..width).rev() {
                    self.0.push(b.bit(i));
                }
            }
        }
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0)
    }

    /// Big-endian packing; the final byte is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.0.len().div_ceil(8) * 2);
        for chunk in self.0.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 0x80 >> i;
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, bit_len: usize) -> Result<Bits, BitsError> {
        if hex.len() != bit_len.div_ceil(8) * 2 {
            return Err(BitsError::HexLength {
                hex_len: hex.len(),
                bit_len,
            });
        }
        let mut bits = Vec::with_capacity(bit_len);
        for (i, pair) in hex.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(pair).map_err(|_| BitsError::HexDigit(i * 2))?;
            let byte = u8::from_str_radix(s, 16).map_err(|_| BitsError::HexDigit(i * 2))?;
            for j in 0..8 {
                let pos = i * 8 + j;
                let bit = byte & (0x80 >> j) != 0;
                if pos < bit_len {
                    bits.push(bit);
                } else if bit {
                    return Err(BitsError::Padding);
                }
            }
        }
        Ok(Bits(bits))
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_binary_str(s: &str) -> Option<Bits> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Bits)
    }

    /// All strings of exactly `len` bits, in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = Bits> {
        assert!(len < 64);
        (0u64..1 << len).map(move |v| {
            let mut b = Bits::new();
            b.push_uint(v, len as u32);
            b
        })
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::from(0u32);
        for &b in &self.0 {
            v <<= 1;
            if b {
                v += 1u32;
            }
        }
        v
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("hex string has {hex_len} digits but {bit_len} bits need {} digits", bit_len.div_ceil(8) * 2)]
    HexLength { hex_len: usize, bit_len: usize },
    #[error("invalid hex digit at offset {0}")]
    HexDigit(usize),
    #[error("padding bits after bit_len must be zero")]
    Padding,
}

/// External JSON form: `{"bits_hex": "...", "bit_len": n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitsJson {
    pub bits_hex: String,
    pub bit_len: usize,
}

impl From<&Bits> for BitsJson {
    fn from(b: &Bits) -> Self {
        BitsJson {
            bits_hex: b.to_hex(),
            bit_len: b.len(),
        }
    }
}

impl TryFrom<&BitsJson> for Bits {
    type Error = BitsError;

    fn try_from(j: &BitsJson) -> Result<Self, Self::Error> {
        Bits::from_hex(&j.bits_hex, j.bit_len)
    }
}

/// Sequential reader over a [`Bits`].
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a Bits) -> BitReader<'a> {
        BitReader {
            bits: &bits.0,
            pos: 0,
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        let b = self.bits.get(self.pos).copied()?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_uint(&mut self, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Some(v)
    }

    /// Reads one Elias-gamma code; `None` if the stream ends first.
    pub fn read_gamma(&mut self) -> Option<Nat> {
        let mut zeros = 0usize;
        while !self.read_bit()? {
            zeros += 1;
        }
        if zeros < 64 {
            let rest = self.read_uint(zeros as u32)?;
            Some(Nat::from((1u64 << zeros) | rest))
        } else {
            let mut v = BigUint::from(1u32);
            for _ in 0..zeros {
                v <<= 1;
                if self.read_bit()? {
                    v += 1u32;
                }
            }
            Some(Nat::from(v))
        }
    }
}

/// Length of the Elias-gamma code of `v ≥ 1`.
pub fn gamma_len(v: &Nat) -> usize {
    (2 * v.bit_len() - 1) as usize
}
