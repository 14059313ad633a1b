//! On-disk container for a coded sequence, its index and an optional
//! dictionary.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `RMDA` |
//! | 4 | 2 | format version |
//! | 6 | 1 | codec id |
//! | 7 | 1 | `l1` |
//! | 8 | 1 | `l2` |
//! | 9 | 1 | chunk size |
//! | 10 | 2 | section count |
//! | 12 | 4 | sample interval (Elias only) |
//! | 16 | 8 | `n` |
//! | 24 | 8 | payload bits |
//! | 32 | 24 per section | tag u32, reserved u32, offset u64, length u64 |
//! | after table | 4 | CRC-32 of the file with this field zeroed |
//!
//! Sections start at 8-byte aligned offsets and are zero padded in between.
//! Lookup tables are not stored; they are rebuilt on load.

use std::fmt;
use std::str::FromStr;

use crate::access::{DirectAccessIndex, IndexParams, RmdArray};
use crate::code::CodeSpec;
use crate::corpus::{decode_dictionary, encode_dictionary, Scheme};
use crate::elias::EliasStream;
use crate::error::{Error, Result};
use crate::stream::RmdStream;

pub const MAGIC: [u8; 4] = *b"RMDA";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 32;
const SECTION_ENTRY_LEN: usize = 24;

/// Coding of the stored sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Codec {
    Rmd2Inf,
    Rmd24Inf,
    Rmd245,
    Elias,
}

impl Codec {
    pub fn id(self) -> u8 {
        match self {
            Codec::Rmd2Inf => 1,
            Codec::Rmd24Inf => 2,
            Codec::Rmd245 => 3,
            Codec::Elias => 4,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Codec::Rmd2Inf),
            2 => Ok(Codec::Rmd24Inf),
            3 => Ok(Codec::Rmd245),
            4 => Ok(Codec::Elias),
            _ => Err(Error::Corruption(format!("unknown codec id {id}"))),
        }
    }

    /// The RMD code, `None` for Elias δ.
    pub fn spec(self) -> Option<CodeSpec> {
        match self {
            Codec::Rmd2Inf => Some(CodeSpec::r2_inf()),
            Codec::Rmd24Inf => Some(CodeSpec::r24_inf()),
            Codec::Rmd245 => Some(CodeSpec::r245()),
            Codec::Elias => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Codec::Rmd2Inf => "rmd2inf",
            Codec::Rmd24Inf => "rmd24inf",
            Codec::Rmd245 => "rmd245",
            Codec::Elias => "elias",
        }
    }
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Codec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Codec::Rmd2Inf, Codec::Rmd24Inf, Codec::Rmd245, Codec::Elias]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown codec {s:?}")))
    }
}

/// Section tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u32)]
pub enum Tag {
    Stream = 1,
    L1Byte = 2,
    L2Length = 3,
    BitRanges = 4,
    DeltaOff = 5,
    DeltaB = 6,
    DeltaC = 7,
    Samples = 8,
    Dictionary = 9,
}

impl Tag {
    fn from_u32(v: u32) -> Result<Self> {
        use Tag::*;
        [Stream, L1Byte, L2Length, BitRanges, DeltaOff, DeltaB, DeltaC, Samples, Dictionary]
            .into_iter()
            .find(|t| *t as u32 == v)
            .ok_or_else(|| Error::Corruption(format!("unknown section tag {v}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Stream => "stream",
            Tag::L1Byte => "l1byte",
            Tag::L2Length => "l2length",
            Tag::BitRanges => "bit_ranges",
            Tag::DeltaOff => "delta_off",
            Tag::DeltaB => "delta_b",
            Tag::DeltaC => "delta_c",
            Tag::Samples => "samples",
            Tag::Dictionary => "dictionary",
        }
    }
}

/// The stored sequence.
#[derive(Debug, Clone)]
pub enum Payload {
    Rmd(Box<RmdArray>),
    Elias(EliasStream),
}

/// A loaded or freshly built container.
#[derive(Debug, Clone)]
pub struct Container {
    codec: Codec,
    payload: Payload,
    dictionary: Option<(Scheme, Vec<Vec<u8>>)>,
}

/// A section as laid out in a serialized container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionInfo {
    pub tag: Tag,
    pub offset: u64,
    pub length: u64,
}

fn u32s(v: &[u32]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn u16s(v: &[u16]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn u64s(v: &[u64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn parse_le<const N: usize, T>(bytes: &[u8], what: Tag, from: fn([u8; N]) -> T) -> Result<Vec<T>> {
    if !bytes.len().is_multiple_of(N) {
        return Err(Error::Corruption(format!(
            "section {} has {} bytes, not a multiple of {N}",
            what.name(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(N)
        .map(|c| from(c.try_into().expect("exact chunk")))
        .collect())
}

fn align8(x: usize) -> usize {
    x.div_ceil(8) * 8
}

impl Container {
    pub fn rmd(codec: Codec, array: RmdArray) -> Result<Self> {
        match codec.spec() {
            Some(spec) if spec == *array.spec() => Ok(Self {
                codec,
                payload: Payload::Rmd(Box::new(array)),
                dictionary: None,
            }),
            _ => Err(Error::Config(format!("array code {} does not match codec {codec}", array.spec()))),
        }
    }

    pub fn elias(stream: EliasStream) -> Self {
        Self {
            codec: Codec::Elias,
            payload: Payload::Elias(stream),
            dictionary: None,
        }
    }

    /// Encodes `values` with `codec`. `params` gives the index block sizes;
    /// for Elias δ only `sample_interval` is used.
    pub fn build(codec: Codec, values: &[u64], params: IndexParams, sample_interval: u32) -> Result<Self> {
        match codec.spec() {
            Some(spec) => Self::rmd(codec, RmdArray::build(spec, values, params)?),
            None => Ok(Self::elias(crate::elias::elias_encode(values, sample_interval)?)),
        }
    }

    pub fn with_dictionary(mut self, scheme: Scheme, dictionary: Vec<Vec<u8>>) -> Self {
        self.dictionary = Some((scheme, dictionary));
        self
    }

    pub fn codec(&self) -> Codec {
        self.codec
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn dictionary(&self) -> Option<(Scheme, &[Vec<u8>])> {
        self.dictionary.as_ref().map(|(s, d)| (*s, d.as_slice()))
    }

    pub fn len(&self) -> u64 {
        match &self.payload {
            Payload::Rmd(a) => a.len(),
            Payload::Elias(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn payload_bytes(&self) -> u64 {
        match &self.payload {
            Payload::Rmd(a) => a.stream().payload_bytes(),
            Payload::Elias(e) => e.payload_bytes(),
        }
    }

    /// Random access through the index or the samples.
    pub fn get(&self, t: u64) -> Result<u64> {
        match &self.payload {
            Payload::Rmd(a) => a.get(t),
            Payload::Elias(e) => e.get(t),
        }
    }

    /// Every value, decoded sequentially.
    pub fn decode_all(&self) -> Result<Vec<u64>> {
        match &self.payload {
            Payload::Rmd(a) => a.decode_reference(),
            Payload::Elias(e) => crate::elias::elias_decode(e),
        }
    }

    fn sections(&self) -> Vec<(Tag, Vec<u8>)> {
        let mut out = match &self.payload {
            Payload::Rmd(a) => {
                let ix = a.index();
                vec![
                    (Tag::Stream, a.stream().bytes().to_vec()),
                    (Tag::L1Byte, u32s(ix.l1_byte())),
                    (Tag::L2Length, u32s(ix.l2_length())),
                    (Tag::BitRanges, u16s(ix.bit_ranges())),
                    (Tag::DeltaOff, u32s(ix.delta_off())),
                    (Tag::DeltaB, u64s(ix.delta_b_words())),
                    (Tag::DeltaC, u64s(ix.delta_c_words())),
                ]
            }
            Payload::Elias(e) => vec![(Tag::Stream, e.bytes().to_vec()), (Tag::Samples, u64s(e.samples()))],
        };
        if let Some((scheme, dict)) = &self.dictionary {
            out.push((Tag::Dictionary, encode_dictionary(*scheme, dict)));
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let sections = self.sections();
        let (l1, l2, chunk, interval, n, payload_bits) = match &self.payload {
            Payload::Rmd(a) => {
                let p = a.index().params();
                (p.l1() as u8, p.l2() as u8, p.chunk_size() as u8, 0u32, a.len(), a.stream().payload_bits())
            }
            Payload::Elias(e) => (0, 0, 0, e.sample_interval(), e.len(), e.payload_bits()),
        };
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&[self.codec.id(), l1, l2, chunk]);
        out.extend_from_slice(&(sections.len() as u16).to_le_bytes());
        out.extend_from_slice(&interval.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&payload_bits.to_le_bytes());
        let checksum_at = HEADER_LEN + SECTION_ENTRY_LEN * sections.len();
        let mut offset = align8(checksum_at + 4);
        for (tag, body) in &sections {
            out.extend_from_slice(&(*tag as u32).to_le_bytes());
            out.extend_from_slice(&0u32.to_le_bytes());
            out.extend_from_slice(&(offset as u64).to_le_bytes());
            out.extend_from_slice(&(body.len() as u64).to_le_bytes());
            offset = align8(offset + body.len());
        }
        out.extend_from_slice(&0u32.to_le_bytes());
        for (_, body) in &sections {
            out.resize(align8(out.len()), 0);
            out.extend_from_slice(body);
        }
        let crc = crc32fast::hash(&out);
        out[checksum_at..checksum_at + 4].copy_from_slice(&crc.to_le_bytes());
        out
    }

    /// Section layout of a serialized container.
    pub fn section_table(bytes: &[u8]) -> Result<Vec<SectionInfo>> {
        let short = || Error::Corruption("container shorter than its header".into());
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err(Error::Corruption("not a container: bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::Corruption(format!("unsupported format version {version}")));
        }
        let count = u16::from_le_bytes([bytes[10], bytes[11]]) as usize;
        let table_end = HEADER_LEN + SECTION_ENTRY_LEN * count;
        let data_start = align8(table_end + 4);
        if bytes.len() < table_end + 4 {
            return Err(short());
        }
        let mut out = Vec::with_capacity(count);
        let mut cursor = data_start as u64;
        for e in bytes[HEADER_LEN..table_end].chunks_exact(SECTION_ENTRY_LEN) {
            let field = |i: usize| u64::from_le_bytes(e[i..i + 8].try_into().expect("8 bytes"));
            let tag = Tag::from_u32(u32::from_le_bytes(e[..4].try_into().expect("4 bytes")))?;
            let (offset, length) = (field(8), field(16));
            let end = offset.checked_add(length).ok_or_else(short)?;
            if offset % 8 != 0 || offset < cursor || end > bytes.len() as u64 {
                return Err(Error::Corruption(format!("section {} misplaced", tag.name())));
            }
            if out.iter().any(|s: &SectionInfo| s.tag == tag) {
                return Err(Error::Corruption(format!("duplicate section {}", tag.name())));
            }
            cursor = end;
            out.push(SectionInfo { tag, offset, length });
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let table = Self::section_table(bytes)?;
        let checksum_at = HEADER_LEN + SECTION_ENTRY_LEN * table.len();
        let stored = u32::from_le_bytes(bytes[checksum_at..checksum_at + 4].try_into().expect("4 bytes"));
        let mut hasher = crc32fast::Hasher::new();
        hasher.update(&bytes[..checksum_at]);
        hasher.update(&[0; 4]);
        hasher.update(&bytes[checksum_at + 4..]);
        if hasher.finalize() != stored {
            return Err(Error::Corruption("checksum mismatch".into()));
        }
        let section = |tag: Tag| -> Result<&[u8]> {
            table
                .iter()
                .find(|s| s.tag == tag)
                .map(|s| &bytes[s.offset as usize..(s.offset + s.length) as usize])
                .ok_or_else(|| Error::Corruption(format!("missing section {}", tag.name())))
        };
        let codec = Codec::from_id(bytes[6])?;
        let (l1, l2, chunk) = (bytes[7] as u32, bytes[8] as u32, bytes[9] as u32);
        let interval = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
        let n = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
        let payload_bits = u64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        let stream = section(Tag::Stream)?.to_vec();
        let payload = match codec.spec() {
            Some(spec) => {
                let params = IndexParams::new(l1, l2, chunk)
                    .map_err(|e| Error::Corruption(format!("stored index parameters: {e}")))?;
                let stream = RmdStream::from_parts(&spec, stream, n, payload_bits)?;
                let index = DirectAccessIndex::from_parts(
                    params,
                    n,
                    spec.id(),
                    parse_le(section(Tag::L1Byte)?, Tag::L1Byte, u32::from_le_bytes)?,
                    parse_le(section(Tag::L2Length)?, Tag::L2Length, u32::from_le_bytes)?,
                    parse_le(section(Tag::BitRanges)?, Tag::BitRanges, u16::from_le_bytes)?,
                    parse_le(section(Tag::DeltaOff)?, Tag::DeltaOff, u32::from_le_bytes)?,
                    parse_le(section(Tag::DeltaB)?, Tag::DeltaB, u64::from_le_bytes)?,
                    parse_le(section(Tag::DeltaC)?, Tag::DeltaC, u64::from_le_bytes)?,
                )?;
                Payload::Rmd(Box::new(RmdArray::from_parts(spec, stream, index)?))
            }
            None => {
                let samples = parse_le(section(Tag::Samples)?, Tag::Samples, u64::from_le_bytes)?;
                Payload::Elias(EliasStream::from_parts(stream, n, payload_bits, interval, samples)?)
            }
        };
        let dictionary = match table.iter().any(|s| s.tag == Tag::Dictionary) {
            true => Some(decode_dictionary(section(Tag::Dictionary)?)?),
            false => None,
        };
        Ok(Self {
            codec,
            payload,
            dictionary,
        })
    }
}
