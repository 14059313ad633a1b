//! Packed codeword sequences.

use crate::bits::{load_u64, read_bits, BitString, BitWriter};
use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::rank::{decode_codeword_reference, encode_integer, CountTables};

/// Zero bytes kept after the terminator so any 8-byte window load that starts
/// inside the payload stays in bounds.
pub const TAIL_PADDING: usize = 8;

/// Largest supported stream, in bytes. Byte offsets are stored in 32 bits.
pub const MAX_STREAM_BYTES: u64 = 1 << 32;

/// An encoded sequence: concatenated codewords, the terminator `0 1^{m_1} 0`
/// and zero padding, packed LSB-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RmdStream {
    bytes: Vec<u8>,
    n: u64,
    payload_bits: u64,
    spec_id: String,
}

impl RmdStream {
    /// Reassembles a stream from stored parts, checking the size invariants.
    pub fn from_parts(spec: &CodeSpec, bytes: Vec<u8>, n: u64, payload_bits: u64) -> Result<Self> {
        let needed = required_len(spec, payload_bits);
        if (bytes.len() as u64) < needed {
            return Err(Error::Corruption(format!(
                "stream of {} bytes is shorter than the {needed} bytes its payload needs",
                bytes.len()
            )));
        }
        let term = spec.terminator();
        let tail = read_bits(&bytes, payload_bits, term.len() as u32);
        if tail != term.raw() {
            return Err(Error::Corruption("missing terminator after payload".into()));
        }
        Ok(Self {
            bytes,
            n,
            payload_bits,
            spec_id: spec.id(),
        })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Number of encoded values.
    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    /// Bytes touched by the payload, `ceil(payload_bits / 8)`.
    pub fn payload_bytes(&self) -> u64 {
        self.payload_bits.div_ceil(8)
    }

    pub fn spec_id(&self) -> &str {
        &self.spec_id
    }

    /// Byte holding the first bit of the terminator.
    pub fn terminator_byte(&self) -> usize {
        (self.payload_bits / 8) as usize
    }

    /// Bytes `i..i + 8` as a little-endian word: stream bit `8i + b` is bit `b`.
    pub fn read_window64(&self, i: usize) -> Result<u64> {
        if i + 8 > self.bytes.len() {
            return Err(Error::OutOfBounds {
                index: i as u64,
                len: self.bytes.len() as u64,
            });
        }
        Ok(load_u64(&self.bytes, i))
    }

    #[inline]
    pub(crate) fn window_unchecked(&self, i: usize) -> u64 {
        load_u64(&self.bytes, i)
    }
}

fn required_len(spec: &CodeSpec, payload_bits: u64) -> u64 {
    (payload_bits + spec.terminator().len() as u64).div_ceil(8) + TAIL_PADDING as u64
}

/// Encodes `values` in order.
pub fn encode_sequence(spec: &CodeSpec, counts: &CountTables, values: &[u64]) -> Result<RmdStream> {
    let mut writer = BitWriter::new();
    for &v in values {
        writer.push_bit_string(encode_integer(spec, counts, v)?);
    }
    let payload_bits = writer.bit_len();
    if required_len(spec, payload_bits) > MAX_STREAM_BYTES {
        return Err(Error::Capacity(format!(
            "encoded stream of {payload_bits} bits exceeds 4 GiB"
        )));
    }
    writer.push_bit_string(spec.terminator());
    let bytes = writer.finish(TAIL_PADDING);
    Ok(RmdStream {
        bytes,
        n: values.len() as u64,
        payload_bits,
        spec_id: spec.id(),
    })
}

/// Every codeword start in `[0, payload_bits]`, found by testing the start
/// condition at each bit. The terminator start at `payload_bits` is included.
pub fn scan_starts(spec: &CodeSpec, stream: &RmdStream) -> Vec<u64> {
    let bytes = stream.bytes();
    (0..=stream.payload_bits)
        .filter(|&p| {
            let window = read_bits(bytes, p, 57);
            spec.start_decision(window, 57) == Some(true)
        })
        .collect()
}

/// Bit-serial reference decoder: splits at start positions and ranks every
/// codeword independently.
pub fn decode_sequence_reference(spec: &CodeSpec, counts: &CountTables, stream: &RmdStream) -> Result<Vec<u64>> {
    let starts = scan_starts(spec, stream);
    let n = stream.len() as usize;
    if starts.len() != n + 1 || starts.first() != Some(&0) && n > 0 {
        return Err(Error::Corruption(format!(
            "found {} codeword starts for {n} elements",
            starts.len().saturating_sub(1)
        )));
    }
    starts
        .windows(2)
        .map(|w| {
            let len = w[1] - w[0];
            if len > 57 {
                return Err(Error::Corruption(format!("codeword of {len} bits at bit {}", w[0])));
            }
            let bits = BitString::from_raw(read_bits(stream.bytes(), w[0], len as u32), len as u32);
            decode_codeword_reference(spec, counts, &bits)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::codeword_counts;

    fn setup(spec: CodeSpec) -> (CodeSpec, CountTables) {
        let counts = codeword_counts(&spec).unwrap();
        (spec, counts)
    }

    fn payload_string(s: &RmdStream) -> String {
        (0..s.payload_bits())
            .map(|p| if read_bits(s.bytes(), p, 1) == 1 { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn empty_sequence() {
        let (spec, counts) = setup(CodeSpec::r2_inf());
        let s = encode_sequence(&spec, &counts, &[]).unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(s.payload_bits(), 0);
        assert_eq!(s.bytes()[0] & 0x0F, 0b0110);
        assert!(s.bytes().len() >= TAIL_PADDING);
        assert_eq!(decode_sequence_reference(&spec, &counts, &s).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn small_sequences() {
        let (spec, counts) = setup(CodeSpec::r2_inf());
        let s = encode_sequence(&spec, &counts, &[0, 1, 0]).unwrap();
        assert_eq!(payload_string(&s), "0110110011");
        assert_eq!(s.payload_bits(), 10);
        assert_eq!(decode_sequence_reference(&spec, &counts, &s).unwrap(), vec![0, 1, 0]);

        let (spec, counts) = setup(CodeSpec::r24_inf());
        let s = encode_sequence(&spec, &counts, &[3]).unwrap();
        assert_eq!(payload_string(&s), "01101");
        assert_eq!(decode_sequence_reference(&spec, &counts, &s).unwrap(), vec![3]);
    }

    #[test]
    fn terminator_is_a_start() {
        for spec in [CodeSpec::r2_inf(), CodeSpec::r24_inf(), CodeSpec::r245()] {
            let (spec, counts) = setup(spec);
            let s = encode_sequence(&spec, &counts, &[5, 0, 17, 2]).unwrap();
            let starts = scan_starts(&spec, &s);
            assert_eq!(starts.last(), Some(&s.payload_bits()));
            assert_eq!(starts.len(), 5);
        }
    }

    #[test]
    fn window_loads() {
        let (spec, counts) = setup(CodeSpec::r2_inf());
        let mut s = encode_sequence(&spec, &counts, &[]).unwrap();
        s.bytes = vec![0; 16];
        assert_eq!(s.read_window64(0).unwrap(), 0);
        s.bytes[0] = 0x01;
        assert_eq!(s.read_window64(0).unwrap(), 1);
        s.bytes[0] = 0xFF;
        s.bytes[1] = 0x0F;
        assert_eq!(s.read_window64(1).unwrap(), 0x0F);
        assert!(matches!(s.read_window64(9), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn from_parts_checks_layout() {
        let (spec, counts) = setup(CodeSpec::r24_inf());
        let s = encode_sequence(&spec, &counts, &[1, 2, 3]).unwrap();
        let again = RmdStream::from_parts(&spec, s.bytes().to_vec(), 3, s.payload_bits()).unwrap();
        assert_eq!(again, s);
        let short = s.bytes()[..s.bytes().len() - 1].to_vec();
        assert!(RmdStream::from_parts(&spec, short, 3, s.payload_bits()).is_err());
        assert!(RmdStream::from_parts(&spec, s.bytes().to_vec(), 3, s.payload_bits() - 1).is_err());
    }

    #[test]
    fn corrupted_count_is_reported() {
        let (spec, counts) = setup(CodeSpec::r2_inf());
        let s = encode_sequence(&spec, &counts, &[1, 2]).unwrap();
        let wrong = RmdStream { n: 3, ..s };
        assert!(matches!(
            decode_sequence_reference(&spec, &counts, &wrong),
            Err(Error::Corruption(_))
        ));
    }
}
