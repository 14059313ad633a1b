//! Codeword counting and the monotonic integer/codeword bijection.
//!
//! Codewords of length `L` are ordered by construction:
//!
//! 1. for each `k` in `K` ascending, every codeword of length `L - k - 1`
//!    (in its own order) followed by `0 1^k`;
//! 2. for finite codes, every codeword of length `L - 1` whose last interior
//!    group is `0 1^r` with `r >= max K`, followed by a single `1`;
//! 3. the word `0 1^{L-1}` when `L - 1` is a delimiter run.
//!
//! Shorter codewords come first, so the index of a codeword in this order is
//! the integer it encodes.

use crate::bits::BitString;
use crate::code::CodeSpec;
use crate::error::{Error, Result};

/// Per-length codeword counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    /// `w[L]`: codewords of exactly `L` bits, `L` in `[0, max_len]`.
    w: Vec<u64>,
    /// `c[L]`: codewords strictly shorter than `L`, `L` in `[0, max_len + 1]`.
    c: Vec<u64>,
    /// `x[L]`: codewords of length `L` whose last interior group has a run of
    /// at least `max K` ones. Always zero for unbounded families.
    x: Vec<u64>,
}

impl CountTables {
    #[inline]
    pub fn w(&self, len: usize) -> u64 {
        self.w.get(len).copied().unwrap_or(0)
    }

    #[inline]
    pub fn c(&self, len: usize) -> u64 {
        self.c.get(len).copied().unwrap_or(0)
    }

    pub(crate) fn w_signed(&self, len: i64) -> u64 {
        if len < 0 {
            0
        } else {
            self.w(len as usize)
        }
    }

    fn x(&self, len: usize) -> u64 {
        self.x.get(len).copied().unwrap_or(0)
    }

    pub fn w_table(&self) -> &[u64] {
        &self.w
    }

    pub fn c_table(&self) -> &[u64] {
        &self.c
    }

    /// Number of encodable integers, `C[max_len + 1]`.
    pub fn capacity(&self) -> u64 {
        *self.c.last().expect("non-empty")
    }
}

/// Computes `W`, `C` (and the rule-2 helper counts) by the construction
/// recurrence.
pub fn codeword_counts(spec: &CodeSpec) -> Result<CountTables> {
    let max = spec.max_len() as usize;
    let k_max = spec.k_max() as usize;
    let long = spec.allow_long_groups();
    let mut w = vec![0u64; max + 1];
    let mut x = vec![0u64; max + 1];
    let overflow = |len: usize| Error::Capacity(format!("codeword count overflows at length {len}"));
    for len in 0..=max {
        let mut total = 0u64;
        for &k in spec.k() {
            let k = k as usize;
            if len > k {
                total = total.checked_add(w[len - k - 1]).ok_or_else(|| overflow(len))?;
            }
        }
        if long && len >= 1 {
            total = total.checked_add(x[len - 1]).ok_or_else(|| overflow(len))?;
        }
        if len >= 1 && spec.is_delimiter_run(len as u32 - 1) {
            total = total.checked_add(1).ok_or_else(|| overflow(len))?;
        }
        w[len] = total;
        if long {
            let exact = if len > k_max { w[len - k_max - 1] } else { 0 };
            let prev = if len >= 1 { x[len - 1] } else { 0 };
            x[len] = exact.checked_add(prev).ok_or_else(|| overflow(len))?;
        }
    }
    let mut c = Vec::with_capacity(max + 2);
    let mut acc = 0u64;
    c.push(0);
    for &count in &w {
        acc = acc.checked_add(count).ok_or_else(|| overflow(max))?;
        c.push(acc);
    }
    Ok(CountTables { w, c, x })
}

/// All codewords of length at most `max_length`, in encoding order, built by
/// replicating shorter lists exactly as the construction rules read.
pub fn enumerate_codewords(spec: &CodeSpec, max_length: u32) -> Result<Vec<BitString>> {
    if max_length > spec.max_len() {
        return Err(Error::Config(format!(
            "max_length {max_length} exceeds code max_len {}",
            spec.max_len()
        )));
    }
    let max = max_length as usize;
    let k_max = spec.k_max() as usize;
    let mut by_len: Vec<Vec<BitString>> = vec![Vec::new(); max + 1];
    for len in 0..=max {
        let mut list = Vec::new();
        for &k in spec.k() {
            if len > k as usize {
                let group = BitString::zero_ones(k);
                list.extend(by_len[len - k as usize - 1].iter().map(|w| w.concat(group)));
            }
        }
        if spec.allow_long_groups() && len >= 1 {
            let one = BitString::from_raw(1, 1);
            for w in &by_len[len - 1] {
                if trailing_group_run(w).is_some_and(|r| r >= k_max) {
                    list.push(w.concat(one));
                }
            }
        }
        if len >= 1 && spec.is_delimiter_run(len as u32 - 1) {
            list.push(BitString::zero_ones(len as u32 - 1));
        }
        by_len[len] = list;
    }
    Ok(by_len.into_iter().flatten().collect())
}

/// Run length of the last interior group, `None` for a bare prefix `0 1^m`.
fn trailing_group_run(w: &BitString) -> Option<usize> {
    let last_zero = (0..w.len()).rev().find(|&i| !w.bit(i))?;
    (last_zero > 0).then(|| w.len() - last_zero - 1)
}

/// Unranks `value` into its codeword.
pub fn encode_integer(spec: &CodeSpec, counts: &CountTables, value: u64) -> Result<BitString> {
    if value >= counts.capacity() {
        return Err(Error::Capacity(format!(
            "value {value} needs a codeword longer than {} bits",
            spec.max_len()
        )));
    }
    // c is non-decreasing; find L with C[L] <= value < C[L + 1].
    let len = counts.c.partition_point(|&c| c <= value) - 1;
    Ok(unrank(spec, counts, len, value - counts.c(len)))
}

fn unrank(spec: &CodeSpec, counts: &CountTables, len: usize, mut rank: u64) -> BitString {
    for &k in spec.k() {
        let k = k as usize;
        if len > k {
            let bucket = counts.w(len - k - 1);
            if rank < bucket {
                return unrank(spec, counts, len - k - 1, rank).concat(BitString::zero_ones(k as u32));
            }
            rank -= bucket;
        }
    }
    if spec.allow_long_groups() && len >= 1 {
        let bucket = counts.x(len - 1);
        if rank < bucket {
            return unrank_long_tail(spec, counts, len - 1, rank).concat(BitString::from_raw(1, 1));
        }
        rank -= bucket;
    }
    debug_assert!(rank == 0 && spec.is_delimiter_run(len as u32 - 1));
    BitString::zero_ones(len as u32 - 1)
}

/// The `rank`-th codeword of length `len` among those whose last group has at
/// least `max K` ones.
fn unrank_long_tail(spec: &CodeSpec, counts: &CountTables, len: usize, rank: u64) -> BitString {
    let k_max = spec.k_max() as usize;
    let exact = if len > k_max { counts.w(len - k_max - 1) } else { 0 };
    if rank < exact {
        unrank(spec, counts, len - k_max - 1, rank).concat(BitString::zero_ones(k_max as u32))
    } else {
        unrank_long_tail(spec, counts, len - 1, rank - exact).concat(BitString::from_raw(1, 1))
    }
}

/// Splits a codeword into its prefix run and its interior groups. Each group
/// is `(run, end)` where `end` is the bit length up to and including it.
pub(crate) fn parse_codeword(spec: &CodeSpec, bits: &BitString) -> Result<(u32, Vec<(u32, usize)>)> {
    let invalid = || Error::InvalidCodeword(bits.to_string());
    let n = bits.len();
    if n < 2 || bits.bit(0) {
        return Err(invalid());
    }
    let prefix = bits.ones_run(1);
    if !spec.is_delimiter_run(prefix as u32) {
        return Err(invalid());
    }
    let mut groups = Vec::new();
    let mut pos = prefix + 1;
    while pos < n {
        // bits[pos] is a zero: ones_run stopped there.
        let run = bits.ones_run(pos + 1);
        if spec.is_delimiter_run(run as u32) {
            return Err(invalid());
        }
        pos += run + 1;
        groups.push((run as u32, pos));
    }
    Ok((prefix as u32, groups))
}

/// Ranks a codeword: the inverse of [`encode_integer`].
///
/// With `w = w' 0 1^k` the within-length rank is
/// `sum_{k' in K, k' < k} W[L - k' - 1] + rank(w')`, and the bare prefix
/// `0 1^m` is the last word of its length. Unrolling the recursion turns every
/// group into an additive term that only depends on its run and end position.
pub fn decode_codeword_reference(spec: &CodeSpec, counts: &CountTables, bits: &BitString) -> Result<u64> {
    let (prefix, groups) = parse_codeword(spec, bits)?;
    if bits.len() > spec.max_len() as usize {
        return Err(Error::Capacity(format!(
            "codeword of {} bits exceeds max_len {}",
            bits.len(),
            spec.max_len()
        )));
    }
    let mut rank = counts.w(prefix as usize + 1) - 1;
    for (run, end) in groups {
        rank += group_rank(spec, counts, run, end);
    }
    Ok(counts.c(bits.len()) + rank)
}

/// Rank contribution of a group `0 1^run` ending at bit length `end`.
fn group_rank(spec: &CodeSpec, counts: &CountTables, run: u32, end: usize) -> u64 {
    let end = end as i64;
    let below = |limit: u32| -> u64 {
        spec.k()
            .iter()
            .take_while(|&&k| k < limit)
            .map(|&k| counts.w_signed(end - k as i64 - 1))
            .sum()
    };
    let k_max = spec.k_max();
    if run <= k_max {
        return below(run);
    }
    // Long group: past every rule-1 bucket, then through the long-tail
    // sub-list one extra `1` at a time.
    let all = below(u32::MAX);
    let tail: u64 = (1..=(run - 1 - k_max) as i64)
        .map(|d| counts.w_signed(end - d - k_max as i64 - 1))
        .sum();
    all + tail
}
