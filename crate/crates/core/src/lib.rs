//! Reverse multi-delimiter (RMD) codes with fast random access.
//!
//! An RMD code writes each integer as a prefix `0 1^m`, with `m` taken from a
//! delimiter set `M`, followed by groups `0 1^s` with `s` outside `M`. Because
//! a codeword start can be recognised from a few neighbouring bits, a coded
//! sequence can be entered at any byte. This crate provides:
//!
//! * [`code`] and [`rank`]: code families, codeword counting and the
//!   monotonic integer/codeword bijection;
//! * [`stream`]: packing sequences into LSB-first bit streams;
//! * [`tables`]: byte-level start tables and a chunk-driven decoder;
//! * [`access`]: a two-level sampled index giving near-constant-time
//!   element access;
//! * [`elias`]: an Elias δ baseline with sampled offsets;
//! * [`corpus`]: turning text into frequency-ranked integer sequences;
//! * [`container`]: a checksummed on-disk format.
//!
//! ```
//! use rmd_core::{CodeSpec, IndexParams, RmdArray};
//!
//! let values = [3, 0, 17, 42, 1];
//! let array = RmdArray::build(CodeSpec::r24_inf(), &values, IndexParams::default()).unwrap();
//! assert_eq!(array.get(3).unwrap(), 42);
//! ```

pub mod access;
pub mod bits;
pub mod code;
pub mod container;
pub mod corpus;
pub mod elias;
pub mod error;
pub mod rank;
pub mod stream;
pub mod tables;

pub use access::{
    build_index, extract, index_overhead, locate, DirectAccessIndex, IndexOverhead, IndexParams, LocateTrace,
    LocateTracer, RmdArray,
};
pub use bits::BitString;
pub use code::{CodeSpec, Family};
pub use container::{Codec, Container};
pub use corpus::{CorpusModel, Scheme};
pub use elias::{elias_decode, elias_encode, elias_extract, EliasStream};
pub use error::{Error, Result};
pub use rank::{codeword_counts, decode_codeword_reference, encode_integer, enumerate_codewords, CountTables};
pub use stream::{decode_sequence_reference, encode_sequence, scan_starts, RmdStream};
pub use tables::{build_chunk_tables, build_words_table, decode_number, ChunkTables, FastTables};
