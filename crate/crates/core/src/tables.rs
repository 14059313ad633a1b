//! Byte-granular lookup tables.
//!
//! * [`WordsTable`] counts the codewords that start in a byte, indexed by the
//!   byte plus the lookahead bits of the next byte.
//! * [`StartOffsets`] gives the bit position of each of those starts.
//! * [`ChunkTables`] drive the table-based decoder: a codeword aligned at bit
//!   0 of a 64-bit window is consumed `chunk_size` bits at a time, each step
//!   looking up `(ptr << chunk_size) | chunk` to get the next `ptr`, an
//!   additive output and a continuation flag. `ptr` packs the chunk index and
//!   the state of the trailing-run automaton.

use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::rank::CountTables;
use crate::stream::RmdStream;

/// At most this many codewords start in one byte when `m_1 >= 2`.
pub const MAX_STARTS_PER_BYTE: usize = 3;

const NO_START: u8 = u8::MAX;

/// Default chunk width of the decoding automaton.
pub const DEFAULT_CHUNK_SIZE: u32 = 7;

/// Number of codeword starts per byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordsTable {
    counts: Vec<u8>,
    lookahead_bits: u32,
}

/// Bit offsets of the codeword starts inside a byte, in stream order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartOffsets {
    offsets: Vec<[u8; MAX_STARTS_PER_BYTE]>,
}

impl WordsTable {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn entries(&self) -> &[u8] {
        &self.counts
    }

    /// Lookahead bits taken from the following byte.
    pub fn lookahead_bits(&self) -> u32 {
        self.lookahead_bits
    }

    /// Table index of the window starting at byte `i`: the byte itself and
    /// the next `lookahead_bits` stream bits.
    #[inline(always)]
    pub fn index_of(&self, window: u64) -> usize {
        (window & ((1u64 << (8 + self.lookahead_bits)) - 1)) as usize
    }

    #[inline(always)]
    pub fn count(&self, idx: usize) -> u8 {
        self.counts[idx]
    }

    pub fn size_bytes(&self) -> usize {
        self.counts.len()
    }
}

impl StartOffsets {
    /// Bit offset of the `(s + 1)`-th start, or `None`.
    pub fn offset(&self, idx: usize, s: usize) -> Option<u32> {
        let o = *self.offsets.get(idx)?.get(s)?;
        (o != NO_START).then_some(o as u32)
    }

    pub fn size_bytes(&self) -> usize {
        self.offsets.len() * MAX_STARTS_PER_BYTE
    }

    #[inline(always)]
    pub(crate) fn raw(&self, idx: usize) -> &[u8; MAX_STARTS_PER_BYTE] {
        &self.offsets[idx]
    }
}

/// Builds the start-count table and the start-offset table. The index is a
/// byte plus 4 lookahead bits (more for finite codes with long delimiters);
/// codes that need fewer lookahead bits get entries replicated across the
/// unused ones.
pub fn build_words_table(spec: &CodeSpec) -> Result<(WordsTable, StartOffsets)> {
    let lookahead = spec.lookahead_bits().max(4);
    if lookahead > 8 {
        return Err(Error::Config(format!(
            "start detection needs {lookahead} lookahead bits, at most 8 are supported"
        )));
    }
    let width = 8 + lookahead;
    let size = 1usize << width;
    let mut counts = vec![0u8; size];
    let mut offsets = vec![[NO_START; MAX_STARTS_PER_BYTE]; size];
    for idx in 0..size {
        let mut found = 0usize;
        for p in 0..8u32 {
            let decided = spec
                .start_decision((idx as u64) >> p, width - p)
                .expect("lookahead covers every in-byte position");
            if decided {
                if found >= MAX_STARTS_PER_BYTE {
                    return Err(Error::Config("more than 3 codeword starts in one byte".into()));
                }
                offsets[idx][found] = p as u8;
                found += 1;
            }
        }
        counts[idx] = found as u8;
    }
    Ok((
        WordsTable {
            counts,
            lookahead_bits: lookahead,
        },
        StartOffsets { offsets },
    ))
}

/// Number of codewords that start in byte `i` of the stream.
pub fn words(stream: &RmdStream, table: &WordsTable, i: usize) -> Result<u8> {
    let w = stream.read_window64(i)?;
    Ok(table.count(table.index_of(w)))
}

/// Shifts `window` so the `(s + 1)`-th codeword starting in its first byte
/// sits at bit 0.
pub fn align(offsets: &StartOffsets, window: u64, idx: usize, s: usize) -> Result<u64> {
    let starts = offsets.raw(idx).iter().take_while(|&&o| o != NO_START).count();
    match offsets.offset(idx, s) {
        Some(o) => Ok(window >> o),
        None => Err(Error::Phase { skip: s, starts }),
    }
}

/// Chunk-decoding tables. Entry `v = (ptr << chunk_size) | chunk_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkTables {
    chunk_size: u32,
    n_states: usize,
    chunks: usize,
    next_state: Vec<u8>,
    out: Vec<u32>,
    cont: Vec<u8>,
}

impl ChunkTables {
    pub fn chunk_size(&self) -> u32 {
        self.chunk_size
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Chunk positions covered by the tables.
    pub fn chunks(&self) -> usize {
        self.chunks
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    /// Bytes used: one per `next_state` and `cont` entry, four per `out` entry.
    pub fn size_bytes(&self) -> usize {
        self.next_state.len() + 4 * self.out.len() + self.cont.len()
    }

    pub fn entry(&self, v: usize) -> (u8, u32, bool) {
        (self.next_state[v], self.out[v], self.cont[v] != 0)
    }

    /// Decodes the codeword that starts at absolute stream bit `start`.
    #[inline]
    pub(crate) fn decode_at(&self, bytes: &[u8], start: u64) -> Result<u32> {
        let c = self.chunk_size;
        let mask = (1u64 << c) - 1;
        let mut bit = start;
        let mut window = crate::bits::load_u64(bytes, (bit >> 3) as usize) >> (bit & 7);
        let mut avail = 64 - (bit & 7) as u32;
        let mut ptr = 0usize;
        let mut out = 0u32;
        for _ in 0..self.chunks {
            if avail < c {
                let byte = (bit >> 3) as usize;
                if byte + 8 > bytes.len() {
                    return Err(Error::Corruption(format!("codeword at bit {start} runs past the stream")));
                }
                window = crate::bits::load_u64(bytes, byte) >> (bit & 7);
                avail = 64 - (bit & 7) as u32;
            }
            let v = (ptr << c) | (window & mask) as usize;
            out = out.wrapping_add(self.out[v]);
            if self.cont[v] == 0 {
                return Ok(out);
            }
            ptr = self.next_state[v] as usize;
            window >>= c;
            avail -= c;
            bit += c as u64;
        }
        Err(Error::Corruption(format!(
            "codeword at bit {start} does not terminate within {} chunks",
            self.chunks
        )))
    }
}

/// One step of the bit-serial ranking automaton.
enum Step {
    Continue { state: usize, add: u64 },
    Terminate { add: u64 },
}

/// Trailing-run automaton over a codeword aligned at position 0.
///
/// State 0 is the prefix `0 1^m`. State `1 + r` means a zero was seen and
/// followed by `r` ones so far; that zero either opens an interior group or
/// is the first bit of the next codeword. For finite codes the last state
/// covers interior groups longer than `max K`. Outputs are rank increments
/// that depend only on the position, so they can be summed per chunk.
struct RankAutomaton<'a> {
    spec: &'a CodeSpec,
    counts: &'a CountTables,
    tracked_runs: u32,
    long_state: Option<usize>,
}

impl<'a> RankAutomaton<'a> {
    fn new(spec: &'a CodeSpec, counts: &'a CountTables) -> Self {
        let (tracked_runs, long_state) = if spec.allow_long_groups() {
            let runs = spec.k_max() + 1;
            (runs, Some(1 + runs as usize))
        } else {
            (spec.lookahead_bits(), None)
        };
        debug_assert_eq!(1 + tracked_runs as usize + long_state.map_or(0, |_| 1), spec.n_states());
        Self {
            spec,
            counts,
            tracked_runs,
            long_state,
        }
    }

    fn w(&self, len: i64) -> u64 {
        self.counts.w_signed(len)
    }

    fn gaps_below(&self, limit: u32, end: i64) -> u64 {
        self.spec
            .k()
            .iter()
            .take_while(|&&k| k < limit)
            .fold(0u64, |acc, &k| acc.wrapping_add(self.w(end - k as i64 - 1)))
    }

    /// The next codeword starts at `len`: contribute `C[len]`.
    fn finish(&self, len: i64) -> Step {
        let add = if len < 0 { 0 } else { self.counts.c(len as usize) };
        Step::Terminate { add }
    }

    fn step(&self, state: usize, pos: u32, bit: bool) -> Step {
        let p = pos as i64;
        if state == 0 {
            return match (pos, bit) {
                (0, _) | (_, true) => Step::Continue { state: 0, add: 0 },
                // prefix 0 1^(pos - 1) complete: last word of length pos.
                (_, false) => Step::Continue {
                    state: 1,
                    add: self.w(p).wrapping_sub(1),
                },
            };
        }
        if Some(state) == self.long_state {
            let k_max = self.spec.k_max() as i64;
            return if bit {
                Step::Continue {
                    state,
                    add: self.w(p - 1 - k_max),
                }
            } else {
                Step::Continue {
                    state: 1,
                    add: self.gaps_below(u32::MAX, p),
                }
            };
        }
        let run = (state - 1) as u32;
        if bit {
            let next = run + 1;
            if next < self.tracked_runs {
                Step::Continue { state: state + 1, add: 0 }
            } else if let Some(long) = self.long_state {
                Step::Continue { state: long, add: 0 }
            } else {
                // unbounded tail reached: the zero at pos - next was a start.
                self.finish(p - next as i64)
            }
        } else if self.spec.is_delimiter_run(run) {
            self.finish(p - run as i64 - 1)
        } else {
            // group 0 1^run ends at pos; the new zero opens the next one.
            Step::Continue {
                state: 1,
                add: self.gaps_below(run, p),
            }
        }
    }
}

/// Builds the chunk tables for `spec`. Chunks cover `max_len` codeword bits
/// plus the bits after it that reveal the next start.
pub fn build_chunk_tables(spec: &CodeSpec, counts: &CountTables, chunk_size: u32) -> Result<ChunkTables> {
    if !(4..=8).contains(&chunk_size) {
        return Err(Error::Config(format!("chunk_size {chunk_size} outside [4, 8]")));
    }
    let n_states = spec.n_states();
    let horizon = spec.max_len() + 1 + spec.lookahead_bits();
    let chunks = horizon.div_ceil(chunk_size) as usize;
    if chunks * n_states > u8::MAX as usize + 1 {
        return Err(Error::Config(format!(
            "{chunks} chunks x {n_states} states do not fit a one-byte pointer"
        )));
    }
    let automaton = RankAutomaton::new(spec, counts);
    let entries = (chunks * n_states) << chunk_size;
    let mut next_state = vec![0u8; entries];
    let mut out = vec![0u32; entries];
    let mut cont = vec![0u8; entries];
    for chunk in 0..chunks {
        for state in 0..n_states {
            let ptr = chunk * n_states + state;
            for bits in 0..(1usize << chunk_size) {
                let v = (ptr << chunk_size) | bits;
                let mut st = state;
                let mut acc = 0u64;
                let mut done = false;
                for b in 0..chunk_size {
                    let pos = chunk as u32 * chunk_size + b;
                    match automaton.step(st, pos, (bits >> b) & 1 == 1) {
                        Step::Continue { state, add } => {
                            st = state;
                            acc = acc.wrapping_add(add);
                        }
                        Step::Terminate { add } => {
                            acc = acc.wrapping_add(add);
                            done = true;
                            break;
                        }
                    }
                }
                out[v] = acc as u32;
                if !done {
                    cont[v] = 1;
                    if chunk + 1 < chunks {
                        next_state[v] = ((chunk + 1) * n_states + st) as u8;
                    }
                }
            }
        }
    }
    Ok(ChunkTables {
        chunk_size,
        n_states,
        chunks,
        next_state,
        out,
        cont,
    })
}

/// All lookup tables a stream needs for random access.
#[derive(Debug, Clone)]
pub struct FastTables {
    pub words: WordsTable,
    pub offsets: StartOffsets,
    pub chunks: ChunkTables,
}

impl FastTables {
    pub fn build(spec: &CodeSpec, counts: &CountTables, chunk_size: u32) -> Result<Self> {
        let (words, offsets) = build_words_table(spec)?;
        let chunks = build_chunk_tables(spec, counts, chunk_size)?;
        Ok(Self { words, offsets, chunks })
    }

    pub fn size_bytes(&self) -> usize {
        self.words.size_bytes() + self.offsets.size_bytes() + self.chunks.size_bytes()
    }

    #[inline(always)]
    pub(crate) fn words_at(&self, stream: &RmdStream, i: usize) -> u8 {
        self.words.count(self.words.index_of(stream.window_unchecked(i)))
    }
}

/// Decodes the `(s + 1)`-th codeword, in stream order, that starts in byte
/// `i`.
pub fn decode_number(stream: &RmdStream, tables: &FastTables, i: usize, s: usize) -> Result<u64> {
    let window = stream.read_window64(i)?;
    let idx = tables.words.index_of(window);
    let offset = match tables.offsets.offset(idx, s) {
        Some(o) => o,
        None => {
            return Err(Error::Phase {
                skip: s,
                starts: tables.words.count(idx) as usize,
            })
        }
    };
    let start = 8 * i as u64 + offset as u64;
    tables.chunks.decode_at(stream.bytes(), start).map(u64::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::rank::{codeword_counts, encode_integer};
    use crate::stream::encode_sequence;

    fn tables(spec: &CodeSpec) -> (CountTables, FastTables) {
        let counts = codeword_counts(spec).unwrap();
        let t = FastTables::build(spec, &counts, DEFAULT_CHUNK_SIZE).unwrap();
        (counts, t)
    }

    #[test]
    fn words_table_basics() {
        for spec in [CodeSpec::r2_inf(), CodeSpec::r24_inf()] {
            let (w, _) = build_words_table(&spec).unwrap();
            assert_eq!(w.len(), 4096);
            assert_eq!(w.count(0), 0);
            assert!(w.entries().iter().all(|&c| c <= 3));
        }
        let (w, _) = build_words_table(&CodeSpec::r245()).unwrap();
        assert_eq!(w.len(), 1 << 14);
    }

    #[test]
    fn two_starts_confirmed_by_lookahead() {
        // stream bits 0110 0011 | 0 ... : starts at 0 and 5, the second one
        // only decidable from the next byte.
        let spec = CodeSpec::r24_inf();
        let (w, off) = build_words_table(&spec).unwrap();
        let window: BitString = "011000110".parse().unwrap();
        let idx = w.index_of(window.raw());
        assert_eq!(w.count(idx), 2);
        assert_eq!(off.offset(idx, 0), Some(0));
        assert_eq!(off.offset(idx, 1), Some(5));
        assert_eq!(off.offset(idx, 2), None);
        // same byte, but 0111 0 follows: run of three is not a delimiter.
        let window: BitString = "0110001110".parse().unwrap();
        assert_eq!(w.count(w.index_of(window.raw())), 1);
    }

    #[test]
    fn align_phase_error() {
        let spec = CodeSpec::r2_inf();
        let (_, off) = build_words_table(&spec).unwrap();
        let window: BitString = "01100000".parse().unwrap();
        let idx = window.raw() as usize;
        assert_eq!(align(&off, window.raw(), idx, 0).unwrap(), window.raw());
        assert_eq!(align(&off, window.raw(), idx, 1), Err(Error::Phase { skip: 1, starts: 1 }));
    }

    #[test]
    fn chunk_table_examples() {
        let spec = CodeSpec::r24_inf();
        let (counts, t) = tables(&spec);
        let s = encode_sequence(&spec, &counts, &[3]).unwrap();
        assert_eq!(decode_number(&s, &t, 0, 0).unwrap(), 3);
        let s = encode_sequence(&spec, &counts, &[0]).unwrap();
        assert_eq!(decode_number(&s, &t, 0, 0).unwrap(), 0);
        // the second start in byte 0 is the terminator
        assert!(matches!(decode_number(&s, &t, 0, 1), Err(Error::Corruption(_))));
        assert!(matches!(decode_number(&s, &t, 0, 2), Err(Error::Phase { skip: 2, starts: 2 })));
    }

    #[test]
    fn every_short_codeword_decodes() {
        for spec in [CodeSpec::r2_inf(), CodeSpec::r24_inf(), CodeSpec::r245()] {
            let (counts, t) = tables(&spec);
            for v in 0..counts.c(17) {
                let cw = encode_integer(&spec, &counts, v).unwrap();
                let s = encode_sequence(&spec, &counts, &[v]).unwrap();
                assert_eq!(decode_number(&s, &t, 0, 0).unwrap(), v, "{spec} {cw}");
            }
        }
    }

    #[test]
    fn longest_codewords_decode() {
        for spec in [CodeSpec::r2_inf(), CodeSpec::r24_inf(), CodeSpec::r245()] {
            let (counts, t) = tables(&spec);
            let big = u32::MAX as u64;
            let values = [0, 0, big, 1, big - 1, 7];
            let s = encode_sequence(&spec, &counts, &values).unwrap();
            let starts = crate::stream::scan_starts(&spec, &s);
            let got: Vec<u64> = starts[..values.len()]
                .iter()
                .map(|&p| t.chunks.decode_at(s.bytes(), p).unwrap() as u64)
                .collect();
            assert_eq!(got, values, "{spec}");
        }
    }

    #[test]
    fn table_size_bound() {
        let spec = CodeSpec::r24_inf().with_max_len(45).unwrap();
        let counts = codeword_counts(&spec).unwrap();
        let t = build_chunk_tables(&spec, &counts, 7).unwrap();
        assert_eq!(t.n_states(), 5);
        assert!(t.size_bytes() <= 30 * 1024);
        assert!(build_chunk_tables(&spec, &counts, 3).is_err());
        assert!(build_chunk_tables(&spec, &counts, 9).is_err());
    }
}
