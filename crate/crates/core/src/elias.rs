//! Elias δ coding with sampled bit offsets, the sequential-scan baseline.
//!
//! Value `v` is coded as δ(v + 1). Fields are written most significant bit
//! first in stream order, packed LSB-first like [`crate::stream::RmdStream`].

use crate::bits::{low_mask, read_bits, BitWriter};
use crate::error::{Error, Result};

/// Zero bytes after the payload: a malformed codeword read at the last
/// payload bit still stays in bounds.
const PADDING: usize = 24;

/// Sample intervals used for comparison runs.
pub const DEFAULT_SAMPLE_INTERVALS: [u32; 2] = [4, 512];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliasStream {
    bytes: Vec<u8>,
    n: u64,
    payload_bits: u64,
    sample_interval: u32,
    samples: Vec<u64>,
}

fn reverse(v: u64, width: u32) -> u64 {
    if width == 0 {
        0
    } else {
        v.reverse_bits() >> (64 - width)
    }
}

fn push_msb_first(w: &mut BitWriter, v: u64, width: u32) {
    if width > 32 {
        push_msb_first(w, v >> 32, width - 32);
        push_msb_first(w, v, 32);
    } else {
        w.push_bits(reverse(v & low_mask(width), width), width);
    }
}

fn read_msb_first(bytes: &[u8], pos: u64, width: u32) -> u64 {
    if width > 32 {
        let hi = read_msb_first(bytes, pos, width - 32);
        (hi << 32) | read_msb_first(bytes, pos + (width - 32) as u64, 32)
    } else {
        reverse(read_bits(bytes, pos, width), width)
    }
}

/// Appends the δ code of `x >= 1`.
fn push_delta(w: &mut BitWriter, x: u64) {
    let len = 64 - x.leading_zeros();
    let len_len = 32 - len.leading_zeros();
    push_msb_first(w, 0, len_len - 1);
    push_msb_first(w, len as u64, len_len);
    push_msb_first(w, x, len - 1);
}

/// Decodes one δ codeword at `pos`, returning `(x, bits)`.
#[inline]
fn read_delta(bytes: &[u8], pos: u64) -> (u64, u64) {
    let zeros = read_bits(bytes, pos, 57).trailing_zeros().min(6);
    let len_len = zeros + 1;
    let len = read_msb_first(bytes, pos + zeros as u64, len_len) as u32;
    if len == 0 || len > 64 {
        return (0, (zeros + len_len) as u64);
    }
    let tail = read_msb_first(bytes, pos + (zeros + len_len) as u64, len - 1);
    ((1u64 << (len - 1)) | tail, (zeros + len_len + len - 1) as u64)
}

/// Encodes `values`, sampling the bit offset of every `sample_interval`-th
/// codeword.
pub fn elias_encode(values: &[u64], sample_interval: u32) -> Result<EliasStream> {
    if sample_interval == 0 {
        return Err(Error::Config("sample interval must be positive".into()));
    }
    let mut writer = BitWriter::new();
    let mut samples = Vec::with_capacity(values.len() / sample_interval as usize + 1);
    for (t, &v) in values.iter().enumerate() {
        if t % sample_interval as usize == 0 {
            samples.push(writer.bit_len());
        }
        let x = v
            .checked_add(1)
            .ok_or_else(|| Error::Capacity(format!("value {v} cannot be shifted to a positive integer")))?;
        push_delta(&mut writer, x);
    }
    if samples.is_empty() {
        samples.push(0);
    }
    let payload_bits = writer.bit_len();
    Ok(EliasStream {
        bytes: writer.finish(PADDING),
        n: values.len() as u64,
        payload_bits,
        sample_interval,
        samples,
    })
}

/// Decodes every value sequentially.
pub fn elias_decode(stream: &EliasStream) -> Result<Vec<u64>> {
    let mut pos = 0u64;
    let mut out = Vec::with_capacity(stream.n as usize);
    for _ in 0..stream.n {
        let (x, bits) = stream.checked_read(pos)?;
        out.push(x - 1);
        pos += bits;
    }
    Ok(out)
}

/// Value of element `t`: jump to the preceding sample and skip forward.
pub fn elias_extract(stream: &EliasStream, t: u64) -> Result<u64> {
    if t >= stream.n {
        return Err(Error::OutOfBounds { index: t, len: stream.n });
    }
    let s = stream.sample_interval as u64;
    let mut pos = stream.samples[(t / s) as usize];
    for _ in 0..t % s {
        pos += read_delta(&stream.bytes, pos).1;
        if pos >= stream.payload_bits {
            return Err(Error::Corruption(format!("element {t} lies past the payload")));
        }
    }
    Ok(stream.checked_read(pos)?.0 - 1)
}

impl EliasStream {
    /// Reassembles a stored stream and checks its samples.
    pub fn from_parts(bytes: Vec<u8>, n: u64, payload_bits: u64, sample_interval: u32, samples: Vec<u64>) -> Result<Self> {
        if sample_interval == 0 {
            return Err(Error::Corruption("zero sample interval".into()));
        }
        let expected = n.div_ceil(sample_interval as u64).max(1);
        if samples.len() as u64 != expected
            || samples.first() != Some(&0)
            || samples.windows(2).any(|w| w[0] >= w[1])
            || samples.last().is_some_and(|&p| p > payload_bits)
        {
            return Err(Error::Corruption("sample table inconsistent with the stream".into()));
        }
        if (bytes.len() as u64) < payload_bits.div_ceil(8) + PADDING as u64 {
            return Err(Error::Corruption("Elias stream shorter than its payload".into()));
        }
        Ok(Self {
            bytes,
            n,
            payload_bits,
            sample_interval,
            samples,
        })
    }

    fn checked_read(&self, pos: u64) -> Result<(u64, u64)> {
        if pos >= self.payload_bits {
            return Err(Error::Corruption(format!("codeword at bit {pos} past the payload")));
        }
        let (x, bits) = read_delta(&self.bytes, pos);
        if x == 0 || pos + bits > self.payload_bits {
            return Err(Error::Corruption(format!("malformed δ codeword at bit {pos}")));
        }
        Ok((x, bits))
    }

    pub fn get(&self, t: u64) -> Result<u64> {
        elias_extract(self, t)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    pub fn payload_bytes(&self) -> u64 {
        self.payload_bits.div_ceil(8)
    }

    pub fn sample_interval(&self) -> u32 {
        self.sample_interval
    }

    pub fn samples(&self) -> &[u64] {
        &self.samples
    }

    /// Bytes of the sample table.
    pub fn sample_bytes(&self) -> u64 {
        8 * self.samples.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code_string(v: u64) -> String {
        let s = elias_encode(&[v], 1).unwrap();
        (0..s.payload_bits())
            .map(|p| if read_bits(s.bytes(), p, 1) == 1 { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn small_codes() {
        assert_eq!(code_string(0), "1");
        assert_eq!(code_string(1), "0100");
        assert_eq!(code_string(2), "0101");
        assert_eq!(code_string(3), "01100");
        assert_eq!(code_string(9), "00100010");
    }

    #[test]
    fn wide_values_round_trip() {
        let values = [0, u64::MAX - 1, 1 << 40, 12345, (1 << 63) + 7];
        let s = elias_encode(&values, 2).unwrap();
        assert_eq!(elias_decode(&s).unwrap(), values);
        for (t, &v) in values.iter().enumerate() {
            assert_eq!(elias_extract(&s, t as u64).unwrap(), v);
        }
        assert!(elias_encode(&[u64::MAX], 4).is_err());
    }

    #[test]
    fn samples_and_bounds() {
        let values: Vec<u64> = (0..20).collect();
        let s = elias_encode(&values, 4).unwrap();
        assert_eq!(s.samples().len(), 5);
        assert_eq!(s.samples()[0], 0);
        assert_eq!(elias_extract(&s, 3).unwrap(), 3);
        assert_eq!(elias_extract(&s, 4).unwrap(), 4);
        assert!(matches!(elias_extract(&s, 20), Err(Error::OutOfBounds { .. })));
        let again = EliasStream::from_parts(
            s.bytes().to_vec(),
            s.len(),
            s.payload_bits(),
            4,
            s.samples().to_vec(),
        )
        .unwrap();
        assert_eq!(again, s);
        assert!(EliasStream::from_parts(s.bytes().to_vec(), 20, s.payload_bits(), 4, vec![0, 1]).is_err());
    }

    #[test]
    fn empty_stream() {
        let s = elias_encode(&[], 512).unwrap();
        assert!(s.is_empty());
        assert_eq!(elias_decode(&s).unwrap(), Vec::<u64>::new());
        assert!(elias_encode(&[1], 0).is_err());
    }
}
