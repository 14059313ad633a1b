//! Two-level sampled index and random access into an [`RmdStream`].
//!
//! Element `t` lies in level-1 block `t >> l1` and level-2 block
//! `(t mod L1) >> l2` of it. For every level-1 block the index stores the
//! byte holding its first bit (`L1byte`) and the average level-2 block length
//! in bytes as a 16.16 fixed-point value (`L2Length`). The start byte of
//! level-2 block `j` is approximated by `L1byte + floor(j * L2Length)` and
//! corrected by a small signed `Δ_b`; `Δ_c` counts the codeword starts in
//! that byte that precede the block. A lookup then scans `words()` over a
//! single level-2 block and decodes one codeword with the chunk tables.

use crate::bits::{low_mask, read_word_bits, write_word_bits};
use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::rank::{codeword_counts, CountTables};
use crate::stream::{decode_sequence_reference, encode_sequence, RmdStream};
use crate::tables::{decode_number, FastTables, DEFAULT_CHUNK_SIZE};

/// Block-size exponents and chunk width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexParams {
    l1: u32,
    l2: u32,
    chunk_size: u32,
}

impl IndexParams {
    pub fn new(l1: u32, l2: u32, chunk_size: u32) -> Result<Self> {
        if !(4 <= l2 && l2 < l1 && l1 <= 24) {
            return Err(Error::Config(format!(
                "block exponents need 4 <= l2 < l1 <= 24, got l1={l1} l2={l2}"
            )));
        }
        if !(4..=8).contains(&chunk_size) {
            return Err(Error::Config(format!("chunk_size {chunk_size} outside [4, 8]")));
        }
        Ok(Self { l1, l2, chunk_size })
    }

    pub fn with_blocks(l1: u32, l2: u32) -> Result<Self> {
        Self::new(l1, l2, DEFAULT_CHUNK_SIZE)
    }

    pub fn l1(&self) -> u32 {
        self.l1
    }

    pub fn l2(&self) -> u32 {
        self.l2
    }

    pub fn chunk_size(&self) -> u32 {
        self.chunk_size
    }

    /// Codewords per level-1 block.
    pub fn block1(&self) -> u64 {
        1 << self.l1
    }

    /// Codewords per level-2 block.
    pub fn block2(&self) -> u64 {
        1 << self.l2
    }

    /// Level-2 entries per full level-1 block, the sentinel included.
    fn stride(&self) -> usize {
        (1usize << (self.l1 - self.l2)) + 1
    }
}

impl Default for IndexParams {
    fn default() -> Self {
        Self::new(16, 8, DEFAULT_CHUNK_SIZE).expect("valid defaults")
    }
}

/// The sampled index. Arrays are stored exactly as they are serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectAccessIndex {
    params: IndexParams,
    n: u64,
    spec_id: String,
    l1_byte: Vec<u32>,
    /// 16.16 fixed point.
    l2_length: Vec<u32>,
    bit_ranges: Vec<u16>,
    delta_off: Vec<u32>,
    delta_b: Vec<u64>,
    delta_c: Vec<u64>,
}

/// Byte counts of the index and the tables next to a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndexOverhead {
    /// `L1byte`, `L2Length`, `delta_off` and `Bit_ranges`: 14 bytes per level-1 block.
    pub level1_bytes: u64,
    pub delta_b_bytes: u64,
    pub delta_c_bytes: u64,
    /// Words, start-offset and chunk tables, rebuilt at load time.
    pub table_bytes: u64,
    pub payload_bytes: u64,
}

impl IndexOverhead {
    /// Bytes of the serialized index sections.
    pub fn index_bytes(&self) -> u64 {
        self.level1_bytes + self.delta_b_bytes + self.delta_c_bytes
    }

    /// Everything beyond the payload.
    pub fn total_bytes(&self) -> u64 {
        self.index_bytes() + self.table_bytes
    }

    /// `total_bytes / payload_bytes`.
    pub fn ratio(&self) -> f64 {
        if self.payload_bytes == 0 {
            return 0.0;
        }
        self.total_bytes() as f64 / self.payload_bytes as f64
    }
}

/// Receives the intermediate values of [`locate`].
pub trait LocateTracer {
    fn block(&mut self, _n1: u64, _e1: u64, _n2: u64, _e2: u64, _start_byte: usize, _backward: bool) {}
    /// A byte visited by the scan with the start count after (forward) or
    /// before (backward) it.
    fn step(&mut self, _byte: usize, _words: u8, _e: u64) {}
}

impl LocateTracer for () {}

/// Records every value passed to [`LocateTracer`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocateTrace {
    pub n1: u64,
    pub e1: u64,
    pub n2: u64,
    pub e2: u64,
    pub start_byte: usize,
    pub backward: bool,
    pub steps: Vec<(usize, u8, u64)>,
}

impl LocateTracer for LocateTrace {
    fn block(&mut self, n1: u64, e1: u64, n2: u64, e2: u64, start_byte: usize, backward: bool) {
        self.n1 = n1;
        self.e1 = e1;
        self.n2 = n2;
        self.e2 = e2;
        self.start_byte = start_byte;
        self.backward = backward;
    }

    fn step(&mut self, byte: usize, words: u8, e: u64) {
        self.steps.push((byte, words, e));
    }
}

/// Smallest width whose symmetric offset-binary range holds every delta.
fn signed_width(deltas: &[i64]) -> u32 {
    let mut width = 0u32;
    for &d in deltas {
        let need = if d == 0 {
            0
        } else if d > 0 {
            65 - (d as u64).leading_zeros()
        } else {
            65 - ((-(d + 1)) as u64).leading_zeros()
        };
        width = width.max(need);
    }
    width
}

fn to_offset_binary(d: i64, width: u32) -> u64 {
    if width == 0 {
        0
    } else {
        (d + (1i64 << (width - 1))) as u64
    }
}

fn from_offset_binary(v: u64, width: u32) -> i64 {
    if width == 0 {
        0
    } else {
        v as i64 - (1i64 << (width - 1))
    }
}

/// `floor(j * length)` for a 16.16 length.
#[inline(always)]
fn approx(j: u64, l2_length: u32) -> u64 {
    (j * l2_length as u64) >> 16
}

/// Start byte and in-byte phase of every level-2 block boundary, plus the
/// terminator, found by walking the stream with the words and offset tables.
fn boundary_scan(
    spec: &CodeSpec,
    counts: &CountTables,
    stream: &RmdStream,
    tables: &FastTables,
    l2: u32,
) -> Result<Vec<(u32, u8)>> {
    let n = stream.len();
    let block2 = 1u64 << l2;
    // codewords up to this length encode values below 2^32
    let safe_len = (0..=spec.max_len() as usize + 1)
        .take_while(|&l| counts.c(l) <= 1 << 32)
        .last()
        .map_or(0, |l| l.saturating_sub(1));
    let mut marks = Vec::with_capacity((n / block2) as usize + 2);
    let mut k = 0u64;
    let mut prev_start: Option<u64> = None;
    let last_byte = stream.terminator_byte();
    'bytes: for i in 0..=last_byte {
        let w = stream.read_window64(i)?;
        let idx = tables.words.index_of(w);
        for s in 0..tables.words.count(idx) as usize {
            let bit = 8 * i as u64 + tables.offsets.offset(idx, s).expect("counted start") as u64;
            if let Some(p) = prev_start {
                let len = bit - p;
                if len > spec.max_len() as u64 {
                    return Err(Error::Corruption(format!("codeword of {len} bits at bit {p}")));
                }
                if len as usize > safe_len {
                    let bits = crate::bits::BitString::from_raw(crate::bits::read_bits(stream.bytes(), p, len as u32), len as u32);
                    let v = crate::rank::decode_codeword_reference(spec, counts, &bits)?;
                    if v > u32::MAX as u64 {
                        return Err(Error::Capacity(format!(
                            "element {} = {v} exceeds the 32-bit range of table decoding",
                            k - 1
                        )));
                    }
                }
            }
            if k.is_multiple_of(block2) || k == n {
                if i as u64 > u32::MAX as u64 {
                    return Err(Error::Capacity("stream exceeds 2^32 bytes".into()));
                }
                marks.push((i as u32, s as u8));
            }
            if k == n {
                if bit != stream.payload_bits() {
                    return Err(Error::Corruption(format!(
                        "start {k} at bit {bit}, terminator expected at {}",
                        stream.payload_bits()
                    )));
                }
                break 'bytes;
            }
            prev_start = Some(bit);
            k += 1;
        }
    }
    if k != n {
        return Err(Error::Corruption(format!("found {k} codewords, header says {n}")));
    }
    Ok(marks)
}

/// Builds the index over `stream` in one sequential pass.
pub fn build_index(
    stream: &RmdStream,
    spec: &CodeSpec,
    counts: &CountTables,
    tables: &FastTables,
    params: IndexParams,
) -> Result<DirectAccessIndex> {
    if stream.spec_id() != spec.id() {
        return Err(Error::Config(format!(
            "stream coded with {} but index requested for {}",
            stream.spec_id(),
            spec.id()
        )));
    }
    let n = stream.len();
    let marks = boundary_scan(spec, counts, stream, tables, params.l2)?;
    let per_block = 1usize << (params.l1 - params.l2);
    // marks[m] is boundary m * L2; the last one is the terminator.
    let level2_total = marks.len() - 1;
    let n_blocks = level2_total.div_ceil(per_block).max(1);
    let mut index = DirectAccessIndex {
        params,
        n,
        spec_id: spec.id(),
        l1_byte: Vec::with_capacity(n_blocks),
        l2_length: Vec::with_capacity(n_blocks),
        bit_ranges: Vec::with_capacity(n_blocks),
        delta_off: Vec::with_capacity(n_blocks),
        delta_b: Vec::new(),
        delta_c: Vec::new(),
    };
    let mut b_pos = 0u64;
    let mut c_pos = 0u64;
    for blk in 0..n_blocks {
        let first = blk * per_block;
        let last = ((blk + 1) * per_block).min(level2_total);
        let entries = &marks[first..=last];
        let base = entries[0].0 as u64;
        let span = entries[entries.len() - 1].0 as u64 - base;
        let parts = (entries.len() - 1).max(1) as u64;
        let fixed = (span * 65536 + parts / 2) / parts;
        if fixed > u32::MAX as u64 {
            return Err(Error::Capacity(format!(
                "level-2 blocks of {} bytes overflow the 16.16 length",
                span / parts
            )));
        }
        let fixed = fixed as u32;
        let deltas: Vec<i64> = entries
            .iter()
            .enumerate()
            .map(|(j, &(b, _))| (b as u64 - base) as i64 - approx(j as u64, fixed) as i64)
            .collect();
        let width = signed_width(&deltas);
        if b_pos > u32::MAX as u64 {
            return Err(Error::Capacity("Δ_b bit stream exceeds 2^32 bits".into()));
        }
        index.l1_byte.push(base as u32);
        index.l2_length.push(fixed);
        index.bit_ranges.push(width as u16);
        index.delta_off.push(b_pos as u32);
        for (&d, &(_, phase)) in deltas.iter().zip(entries) {
            write_word_bits(&mut index.delta_b, b_pos, width, to_offset_binary(d, width));
            b_pos += width as u64;
            write_word_bits(&mut index.delta_c, c_pos, 2, phase as u64);
            c_pos += 2;
        }
    }
    index.delta_b.resize(b_pos.div_ceil(64) as usize, 0);
    index.delta_c.resize(c_pos.div_ceil(64) as usize, 0);
    Ok(index)
}

impl DirectAccessIndex {
    /// Reassembles an index from stored arrays and checks their shapes.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: IndexParams,
        n: u64,
        spec_id: String,
        l1_byte: Vec<u32>,
        l2_length: Vec<u32>,
        bit_ranges: Vec<u16>,
        delta_off: Vec<u32>,
        delta_b: Vec<u64>,
        delta_c: Vec<u64>,
    ) -> Result<Self> {
        let index = Self {
            params,
            n,
            spec_id,
            l1_byte,
            l2_length,
            bit_ranges,
            delta_off,
            delta_b,
            delta_c,
        };
        let blocks = index.n_blocks();
        if [index.l2_length.len(), index.bit_ranges.len(), index.delta_off.len()]
            .iter()
            .any(|&l| l != blocks)
        {
            return Err(Error::Corruption("level-1 arrays differ in length".into()));
        }
        if blocks != index.expected_blocks() {
            return Err(Error::Corruption(format!(
                "{blocks} level-1 blocks stored, {} expected for n = {n}",
                index.expected_blocks()
            )));
        }
        let entries = index.total_entries() as u64;
        if (index.delta_c.len() as u64) * 64 < entries * 2 {
            return Err(Error::Corruption("Δ_c array too short".into()));
        }
        if let Some(last) = blocks.checked_sub(1) {
            let end = index.delta_off[last] as u64
                + index.bit_ranges[last] as u64 * index.entries_in_block(last) as u64;
            if (index.delta_b.len() as u64) * 64 < end || index.bit_ranges.iter().any(|&w| w > 40) {
                return Err(Error::Corruption("Δ_b array inconsistent with Bit_ranges".into()));
            }
        }
        Ok(index)
    }

    fn expected_blocks(&self) -> usize {
        (self.n.div_ceil(self.params.block2()) as usize)
            .div_ceil(1 << (self.params.l1 - self.params.l2))
            .max(1)
    }

    pub fn params(&self) -> IndexParams {
        self.params
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spec_id(&self) -> &str {
        &self.spec_id
    }

    pub fn n_blocks(&self) -> usize {
        self.l1_byte.len()
    }

    pub fn l1_byte(&self) -> &[u32] {
        &self.l1_byte
    }

    pub fn l2_length(&self) -> &[u32] {
        &self.l2_length
    }

    /// `L2Length[i]` as a real number.
    pub fn l2_length_f64(&self, i: usize) -> f64 {
        self.l2_length[i] as f64 / 65536.0
    }

    pub fn bit_ranges(&self) -> &[u16] {
        &self.bit_ranges
    }

    pub fn delta_off(&self) -> &[u32] {
        &self.delta_off
    }

    pub fn delta_b_words(&self) -> &[u64] {
        &self.delta_b
    }

    pub fn delta_c_words(&self) -> &[u64] {
        &self.delta_c
    }

    /// Entries of level-1 block `i`, the sentinel included.
    pub fn entries_in_block(&self, i: usize) -> usize {
        let per_block = 1usize << (self.params.l1 - self.params.l2);
        if i + 1 < self.n_blocks() {
            return per_block + 1;
        }
        let before = (i as u64) << self.params.l1;
        let level2 = (self.n - before.min(self.n)).div_ceil(self.params.block2()) as usize;
        level2.min(per_block) + 1
    }

    fn total_entries(&self) -> usize {
        match self.n_blocks() {
            0 => 0,
            b => (b - 1) * self.params.stride() + self.entries_in_block(b - 1),
        }
    }

    #[inline]
    pub fn delta_b(&self, i: usize, j: usize) -> i64 {
        let width = self.bit_ranges[i] as u32;
        let pos = self.delta_off[i] as u64 + j as u64 * width as u64;
        from_offset_binary(read_word_bits(&self.delta_b, pos, width) & low_mask(width), width)
    }

    #[inline]
    pub fn delta_c(&self, i: usize, j: usize) -> u8 {
        let e = i * self.params.stride() + j;
        read_word_bits(&self.delta_c, 2 * e as u64, 2) as u8
    }

    /// Reconstructed start byte of level-2 block `j` of level-1 block `i`.
    #[inline]
    pub fn block_start(&self, i: usize, j: usize) -> usize {
        let b = self.l1_byte[i] as i64 + approx(j as u64, self.l2_length[i]) as i64 + self.delta_b(i, j);
        b as usize
    }

    /// Codewords in level-2 block `j` of level-1 block `i`.
    fn block2_len(&self, i: usize, j: usize) -> u64 {
        let first = ((i as u64) << self.params.l1) + ((j as u64) << self.params.l2);
        (self.n - first).min(self.params.block2())
    }

    pub fn overhead(&self, stream: &RmdStream, tables: &FastTables) -> IndexOverhead {
        index_overhead(self, stream, tables)
    }
}

/// Size breakdown of an index and its lookup tables.
pub fn index_overhead(index: &DirectAccessIndex, stream: &RmdStream, tables: &FastTables) -> IndexOverhead {
    let blocks = index.n_blocks() as u64;
    IndexOverhead {
        level1_bytes: 14 * blocks,
        delta_b_bytes: 8 * index.delta_b.len() as u64,
        delta_c_bytes: 8 * index.delta_c.len() as u64,
        table_bytes: tables.size_bytes() as u64,
        payload_bytes: stream.payload_bytes(),
    }
}

/// Finds the byte where element `t` starts and its index among the starts in
/// that byte, in stream order.
pub fn locate<T: LocateTracer>(
    index: &DirectAccessIndex,
    stream: &RmdStream,
    tables: &FastTables,
    t: u64,
    tracer: &mut T,
) -> Result<(usize, usize)> {
    if t >= index.n {
        return Err(Error::OutOfBounds { index: t, len: index.n });
    }
    let p = index.params;
    let n1 = t >> p.l1;
    let e1 = t & (p.block1() - 1);
    let n2 = e1 >> p.l2;
    let (i1, j) = (n1 as usize, n2 as usize);
    let c_here = index.delta_c(i1, j) as u64;
    let e2 = (e1 & (p.block2() - 1)) + c_here;
    let lo = index.block_start(i1, j);
    let hi = index.block_start(i1, j + 1);
    if hi < lo || hi > stream.terminator_byte() {
        return Err(Error::Corruption(format!("level-2 block {n1}/{n2} spans bytes {lo}..{hi}")));
    }
    let words = |i: usize| tables.words_at(stream, i);
    let backward = 2 * (e2 - c_here) >= p.block2();
    let (mut i, mut e) = if backward {
        let mut e = index.block2_len(i1, j) + c_here - index.delta_c(i1, j + 1) as u64;
        let mut i = hi;
        tracer.block(n1, e1, n2, e2, hi, true);
        while e > e2 {
            if i <= lo {
                return Err(Error::Corruption(format!("backward scan left block {n1}/{n2}")));
            }
            i -= 1;
            let w = words(i);
            e -= w as u64;
            tracer.step(i, w, e);
        }
        (i, e)
    } else {
        tracer.block(n1, e1, n2, e2, lo, false);
        (lo, 0)
    };
    loop {
        if i > hi {
            return Err(Error::Corruption(format!("forward scan left block {n1}/{n2}")));
        }
        let w = words(i) as u64;
        if e + w > e2 {
            tracer.step(i, w as u8, e + w);
            return Ok((i, (e2 - e) as usize));
        }
        e += w;
        tracer.step(i, w as u8, e);
        i += 1;
    }
}

/// Value of element `t`.
pub fn extract(index: &DirectAccessIndex, stream: &RmdStream, tables: &FastTables, t: u64) -> Result<u64> {
    let (byte, skip) = locate(index, stream, tables, t, &mut ())?;
    decode_number(stream, tables, byte, skip)
}

/// A coded sequence with everything needed for random access.
#[derive(Debug, Clone)]
pub struct RmdArray {
    spec: CodeSpec,
    counts: CountTables,
    stream: RmdStream,
    tables: FastTables,
    index: DirectAccessIndex,
}

impl RmdArray {
    /// Encodes `values` and builds the index.
    pub fn build(spec: CodeSpec, values: &[u64], params: IndexParams) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v > u32::MAX as u64) {
            return Err(Error::Capacity(format!("value {v} exceeds the 32-bit range of table decoding")));
        }
        let counts = codeword_counts(&spec)?;
        let stream = encode_sequence(&spec, &counts, values)?;
        Self::from_stream(spec, stream, params)
    }

    /// Builds lookup tables and the index for an existing stream.
    pub fn from_stream(spec: CodeSpec, stream: RmdStream, params: IndexParams) -> Result<Self> {
        let counts = codeword_counts(&spec)?;
        let tables = FastTables::build(&spec, &counts, params.chunk_size())?;
        let index = build_index(&stream, &spec, &counts, &tables, params)?;
        Ok(Self {
            spec,
            counts,
            stream,
            tables,
            index,
        })
    }

    /// Rebuilds lookup tables around a stored stream and index.
    pub fn from_parts(spec: CodeSpec, stream: RmdStream, index: DirectAccessIndex) -> Result<Self> {
        if stream.spec_id() != spec.id() || index.spec_id() != spec.id() || index.len() != stream.len() {
            return Err(Error::Corruption("stream, index and code do not match".into()));
        }
        let counts = codeword_counts(&spec)?;
        let tables = FastTables::build(&spec, &counts, index.params().chunk_size())?;
        Ok(Self {
            spec,
            counts,
            stream,
            tables,
            index,
        })
    }

    pub fn get(&self, t: u64) -> Result<u64> {
        extract(&self.index, &self.stream, &self.tables, t)
    }

    pub fn locate_traced<T: LocateTracer>(&self, t: u64, tracer: &mut T) -> Result<(usize, usize)> {
        locate(&self.index, &self.stream, &self.tables, t, tracer)
    }

    /// All values through the lookup tables.
    pub fn decode_all(&self) -> Result<Vec<u64>> {
        (0..self.len()).map(|t| self.get(t)).collect()
    }

    /// All values through the bit-serial reference decoder.
    pub fn decode_reference(&self) -> Result<Vec<u64>> {
        decode_sequence_reference(&self.spec, &self.counts, &self.stream)
    }

    pub fn len(&self) -> u64 {
        self.stream.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stream.is_empty()
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    pub fn stream(&self) -> &RmdStream {
        &self.stream
    }

    pub fn tables(&self) -> &FastTables {
        &self.tables
    }

    pub fn index(&self) -> &DirectAccessIndex {
        &self.index
    }

    pub fn overhead(&self) -> IndexOverhead {
        index_overhead(&self.index, &self.stream, &self.tables)
    }
}
