//! Short bit strings and LSB-first bit packing.
//!
//! Every bit sequence in this crate is stored in stream order with the first
//! bit in the least significant position: stream bit `8 * i + b` is bit `b` of
//! byte `i`, and the first bit of a [`BitString`] is bit 0 of its word. A
//! little-endian 64-bit load at byte `i` therefore yields the next 64 stream
//! bits with the earliest one at bit 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A bit string of at most 64 bits, first bit in the least significant
/// position.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: u64,
    len: u32,
}

impl BitString {
    pub const MAX_LEN: u32 = 64;

    pub const fn empty() -> Self {
        Self { bits: 0, len: 0 }
    }

    /// Builds a string from the low `len` bits of `bits`. Higher bits are
    /// cleared.
    pub fn from_raw(bits: u64, len: u32) -> Self {
        assert!(len <= Self::MAX_LEN, "bit string longer than 64 bits");
        Self {
            bits: bits & low_mask(len),
            len,
        }
    }

    /// The string `0 1^ones`.
    pub fn zero_ones(ones: u32) -> Self {
        Self::from_raw(low_mask(ones) << 1, ones + 1)
    }

    #[inline]
    pub fn raw(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    pub fn push(&mut self, bit: bool) {
        assert!(self.len < Self::MAX_LEN, "bit string overflow");
        self.bits |= (bit as u64) << self.len;
        self.len += 1;
    }

    /// Appends all bits of `other`.
    pub fn extend(&mut self, other: BitString) {
        assert!(self.len + other.len <= Self::MAX_LEN, "bit string overflow");
        if other.len > 0 {
            self.bits |= other.bits << self.len;
        }
        self.len += other.len;
    }

    pub fn concat(mut self, other: BitString) -> Self {
        self.extend(other);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// Sub-string starting at `from` (to the end).
    pub fn suffix_from(&self, from: usize) -> Self {
        if from >= self.len() {
            return Self::empty();
        }
        Self::from_raw(self.bits >> from, self.len - from as u32)
    }

    /// Length of the run of ones starting at position `from`.
    pub fn ones_run(&self, from: usize) -> usize {
        if from >= self.len() {
            return 0;
        }
        let run = (!(self.bits >> from)).trailing_zeros() as usize;
        run.min(self.len() - from)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > Self::MAX_LEN as usize {
            return Err(Error::Capacity(format!(
                "bit string of {} bits exceeds 64",
                s.len()
            )));
        }
        let mut out = Self::empty();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(Error::InvalidCodeword(s.to_string())),
            }
        }
        Ok(out)
    }
}

#[inline]
pub(crate) const fn low_mask(len: u32) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Appends bits LSB-first into a byte vector.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    acc_len: u32,
    total: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.total
    }

    /// Appends the low `len` bits of `value`, lowest bit first. `len <= 57`.
    pub fn push_bits(&mut self, value: u64, len: u32) {
        debug_assert!(len <= 57);
        self.acc |= (value & low_mask(len)) << self.acc_len;
        self.acc_len += len;
        self.total += len as u64;
        while self.acc_len >= 8 {
            self.bytes.push(self.acc as u8);
            self.acc >>= 8;
            self.acc_len -= 8;
        }
    }

    pub fn push_bit_string(&mut self, bits: BitString) {
        let raw = bits.raw();
        let len = bits.len() as u32;
        if len > 32 {
            self.push_bits(raw, 32);
            self.push_bits(raw >> 32, len - 32);
        } else {
            self.push_bits(raw, len);
        }
    }

    /// Flushes the partial byte and appends `padding` zero bytes.
    pub fn finish(mut self, padding: usize) -> Vec<u8> {
        if self.acc_len > 0 {
            self.bytes.push(self.acc as u8);
        }
        self.bytes.resize(self.bytes.len() + padding, 0);
        self.bytes
    }
}

/// Little-endian 64-bit load at byte `i`. The caller guarantees `i + 8 <= bytes.len()`.
#[inline(always)]
pub(crate) fn load_u64(bytes: &[u8], i: usize) -> u64 {
    let chunk: [u8; 8] = bytes[i..i + 8].try_into().expect("8-byte slice");
    u64::from_le_bytes(chunk)
}

/// Reads up to 57 bits starting at stream bit `pos`.
#[inline]
pub(crate) fn read_bits(bytes: &[u8], pos: u64, len: u32) -> u64 {
    debug_assert!(len <= 57);
    let byte = (pos >> 3) as usize;
    (load_u64(bytes, byte) >> (pos & 7)) & low_mask(len)
}

/// Reads `width` bits (at most 64) from a word-packed LSB-first bit array.
#[inline]
pub(crate) fn read_word_bits(words: &[u64], pos: u64, width: u32) -> u64 {
    if width == 0 {
        return 0;
    }
    let w = (pos >> 6) as usize;
    let off = (pos & 63) as u32;
    let lo = words[w] >> off;
    let v = if off + width > 64 {
        lo | (words[w + 1] << (64 - off))
    } else {
        lo
    };
    v & low_mask(width)
}

/// Writes `width` bits (at most 64) into a word-packed LSB-first bit array,
/// growing it as needed. Target bits must be zero.
pub(crate) fn write_word_bits(words: &mut Vec<u64>, pos: u64, width: u32, value: u64) {
    if width == 0 {
        return;
    }
    let end = pos + width as u64;
    let need = end.div_ceil(64) as usize;
    if words.len() < need {
        words.resize(need, 0);
    }
    let value = value & low_mask(width);
    let w = (pos >> 6) as usize;
    let off = (pos & 63) as u32;
    words[w] |= value << off;
    if off + width > 64 {
        words[w + 1] |= value >> (64 - off);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trip() {
        let s: BitString = "01101".parse().unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.raw(), 0b10110);
        assert_eq!(s.to_string(), "01101");
        assert_eq!(BitString::zero_ones(3).to_string(), "0111");
    }

    #[test]
    fn ones_run_stops_at_end() {
        let s: BitString = "0111".parse().unwrap();
        assert_eq!(s.ones_run(1), 3);
        assert_eq!(s.ones_run(0), 0);
        assert_eq!(s.ones_run(4), 0);
    }

    #[test]
    fn writer_packs_lsb_first() {
        let mut w = BitWriter::new();
        w.push_bit_string("011".parse().unwrap());
        w.push_bit_string("0110".parse().unwrap());
        w.push_bit_string("011".parse().unwrap());
        assert_eq!(w.bit_len(), 10);
        let bytes = w.finish(0);
        // stream 0110110011 -> byte0 bits 0..8 = 0,1,1,0,1,1,0,0
        assert_eq!(bytes, vec![0b0011_0110, 0b0000_0011]);
    }

    #[test]
    fn word_bits_cross_boundary() {
        let mut words = Vec::new();
        write_word_bits(&mut words, 60, 10, 0b11_0101_1011);
        assert_eq!(read_word_bits(&words, 60, 10), 0b11_0101_1011);
        assert_eq!(read_word_bits(&words, 0, 60), 0);
    }
}
