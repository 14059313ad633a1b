//! Text to frequency-ranked integer sequences, and entropy baselines.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How text is cut into symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Alternating maximal runs of word bytes and separator bytes.
    Word,
    /// Consecutive 2-byte blocks; an odd tail becomes a 1-byte token.
    Block2,
}

impl Scheme {
    pub fn id(self) -> u8 {
        match self {
            Scheme::Word => 1,
            Scheme::Block2 => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Scheme::Word),
            2 => Ok(Scheme::Block2),
            _ => Err(Error::Corruption(format!("unknown tokenizer scheme {id}"))),
        }
    }

    pub fn tokenize(self, text: &[u8]) -> Vec<&[u8]> {
        match self {
            Scheme::Word => tokenize_words(text),
            Scheme::Block2 => tokenize_blocks(text, 2),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Word => "word",
            Scheme::Block2 => "block2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Scheme::Word),
            "block2" => Ok(Scheme::Block2),
            _ => Err(Error::Config(format!("unknown scheme {s:?}, expected word or block2"))),
        }
    }
}

/// Letters, digits and every non-ASCII byte.
#[inline]
fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b >= 0x80
}

/// Splits text into maximal word and separator runs. Concatenating the
/// tokens gives back the text.
pub fn tokenize_words(text: &[u8]) -> Vec<&[u8]> {
    text.chunk_by(|a, b| is_word_byte(*a) == is_word_byte(*b)).collect()
}

/// Splits text into blocks of `block_bytes`; the last one may be shorter.
pub fn tokenize_blocks(text: &[u8], block_bytes: usize) -> Vec<&[u8]> {
    assert!(block_bytes > 0, "block size must be positive");
    text.chunks(block_bytes).collect()
}

/// Token counts and entropies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub tokens: u64,
    pub distinct: u64,
    pub h0_bits: f64,
    /// First-order entropy of the underlying bytes, in bits.
    pub h1_bits: f64,
}

/// A frequency-ranked dictionary and the rank sequence of a text.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusModel {
    pub scheme: Scheme,
    /// Tokens by descending frequency, ties by first occurrence.
    pub dictionary: Vec<Vec<u8>>,
    pub frequencies: Vec<u64>,
    /// 0-based dictionary ranks.
    pub sequence: Vec<u64>,
}

/// Ranks tokens by frequency and relabels the stream.
pub fn rank_by_frequency(tokens: &[&[u8]], scheme: Scheme) -> CorpusModel {
    let mut seen: HashMap<&[u8], usize> = HashMap::new();
    let mut first_order: Vec<(&[u8], u64)> = Vec::new();
    let mut ids = Vec::with_capacity(tokens.len());
    for &tok in tokens {
        let id = *seen.entry(tok).or_insert_with(|| {
            first_order.push((tok, 0));
            first_order.len() - 1
        });
        first_order[id].1 += 1;
        ids.push(id);
    }
    let mut order: Vec<usize> = (0..first_order.len()).collect();
    order.sort_by(|&a, &b| first_order[b].1.cmp(&first_order[a].1).then(a.cmp(&b)));
    let mut rank_of = vec![0u64; order.len()];
    for (rank, &id) in order.iter().enumerate() {
        rank_of[id] = rank as u64;
    }
    CorpusModel {
        scheme,
        dictionary: order.iter().map(|&id| first_order[id].0.to_vec()).collect(),
        frequencies: order.iter().map(|&id| first_order[id].1).collect(),
        sequence: ids.iter().map(|&id| rank_of[id]).collect(),
    }
}

impl CorpusModel {
    pub fn from_text(text: &[u8], scheme: Scheme) -> Self {
        rank_by_frequency(&scheme.tokenize(text), scheme)
    }

    /// Rebuilds a model from a dictionary and a rank sequence.
    pub fn from_parts(scheme: Scheme, dictionary: Vec<Vec<u8>>, sequence: Vec<u64>) -> Result<Self> {
        let mut frequencies = vec![0u64; dictionary.len()];
        for &r in &sequence {
            *frequencies
                .get_mut(r as usize)
                .ok_or_else(|| Error::Corruption(format!("rank {r} outside a dictionary of {}", dictionary.len())))? += 1;
        }
        Ok(Self {
            scheme,
            dictionary,
            frequencies,
            sequence,
        })
    }

    /// Concatenation of the tokens the sequence names.
    pub fn reconstruct(&self) -> Result<Vec<u8>> {
        decode_tokens(&self.dictionary, &self.sequence)
    }

    pub fn h0_bits(&self) -> Result<f64> {
        entropy_h0(&self.frequencies)
    }

    pub fn stats(&self, text: &[u8]) -> Result<CorpusStats> {
        Ok(CorpusStats {
            tokens: self.sequence.len() as u64,
            distinct: self.dictionary.len() as u64,
            h0_bits: self.h0_bits()?,
            h1_bits: entropy_h1(text)?,
        })
    }
}

/// Concatenates `dictionary[r]` for every rank `r`.
pub fn decode_tokens(dictionary: &[Vec<u8>], sequence: &[u64]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for &r in sequence {
        let tok = dictionary
            .get(r as usize)
            .ok_or_else(|| Error::Corruption(format!("rank {r} outside a dictionary of {}", dictionary.len())))?;
        out.extend_from_slice(tok);
    }
    Ok(out)
}

/// `sum n_s log2(n / n_s)` over symbol counts.
pub fn entropy_h0(counts: &[u64]) -> Result<f64> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::UndefinedEntropy);
    }
    let n = n as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (n / c as f64).log2())
        .sum())
}

/// First-order entropy of a byte string: for every byte value `c`, the
/// zero-order entropy of the bytes that follow occurrences of `c`.
pub fn entropy_h1(text: &[u8]) -> Result<f64> {
    if text.is_empty() {
        return Err(Error::UndefinedEntropy);
    }
    let mut pairs = vec![[0u64; 256]; 256];
    for w in text.windows(2) {
        pairs[w[0] as usize][w[1] as usize] += 1;
    }
    pairs
        .iter()
        .filter(|row| row.iter().any(|&c| c > 0))
        .map(|row| entropy_h0(row))
        .sum()
}

/// Serializes a dictionary: scheme byte, token count (u32), then every token
/// as a u32 length and its bytes, little-endian.
pub fn encode_dictionary(scheme: Scheme, dictionary: &[Vec<u8>]) -> Vec<u8> {
    let mut out = vec![scheme.id()];
    out.extend_from_slice(&(dictionary.len() as u32).to_le_bytes());
    for tok in dictionary {
        out.extend_from_slice(&(tok.len() as u32).to_le_bytes());
        out.extend_from_slice(tok);
    }
    out
}

pub fn decode_dictionary(bytes: &[u8]) -> Result<(Scheme, Vec<Vec<u8>>)> {
    let truncated = || Error::Corruption("truncated dictionary".into());
    let (&id, mut rest) = bytes.split_first().ok_or_else(truncated)?;
    let scheme = Scheme::from_id(id)?;
    let take_u32 = |rest: &mut &[u8]| -> Result<u32> {
        let (head, tail) = rest.split_first_chunk::<4>().ok_or_else(truncated)?;
        *rest = tail;
        Ok(u32::from_le_bytes(*head))
    };
    let count = take_u32(&mut rest)? as usize;
    let mut dictionary = Vec::with_capacity(count.min(rest.len() / 4));
    for _ in 0..count {
        let len = take_u32(&mut rest)? as usize;
        if rest.len() < len {
            return Err(truncated());
        }
        let (tok, tail) = rest.split_at(len);
        dictionary.push(tok.to_vec());
        rest = tail;
    }
    if !rest.is_empty() {
        return Err(Error::Corruption("trailing bytes after dictionary".into()));
    }
    Ok((scheme, dictionary))
}
