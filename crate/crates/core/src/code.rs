//! Reverse multi-delimiter code families.
//!
//! A code is determined by its delimiter set `M`: a run of ones of length
//! `r` that follows a zero and is itself followed by a zero (or by the end of
//! the lookahead) marks the start of a codeword iff `r` is in `M`. Every
//! codeword is a prefix `0 1^m` with `m` in `M`, followed by zero or more
//! groups `0 1^s` with `s` not in `M`.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Default maximum codeword length: a codeword starting anywhere inside a byte
/// fits the 64-bit window loaded at that byte.
pub const DEFAULT_MAX_LEN: u32 = 57;

/// Delimiter set of a code family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Family {
    /// `M = {m_1, ..., m_t}`.
    Finite(Vec<u32>),
    /// `M = listed ∪ [tail_from, ∞)`, with every listed value below `tail_from`.
    Unbounded { listed: Vec<u32>, tail_from: u32 },
}

impl Family {
    pub fn is_delimiter_run(&self, run: u32) -> bool {
        match self {
            Family::Finite(m) => m.binary_search(&run).is_ok(),
            Family::Unbounded { listed, tail_from } => {
                run >= *tail_from || listed.binary_search(&run).is_ok()
            }
        }
    }

    /// Shortest delimiter run, `m_1`.
    pub fn first_delimiter(&self) -> u32 {
        match self {
            Family::Finite(m) => m[0],
            Family::Unbounded { listed, tail_from } => listed.first().copied().unwrap_or(*tail_from),
        }
    }

    fn validate(&self) -> Result<()> {
        let sorted_distinct = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
        match self {
            Family::Finite(m) => {
                if m.is_empty() || !sorted_distinct(m) {
                    return Err(Error::Config(
                        "delimiter set must be non-empty, ascending and distinct".into(),
                    ));
                }
            }
            Family::Unbounded { listed, tail_from } => {
                if !sorted_distinct(listed) || listed.last().is_some_and(|&l| l >= *tail_from) {
                    return Err(Error::Config(
                        "listed delimiters must be ascending and below the unbounded tail".into(),
                    ));
                }
            }
        }
        if self.first_delimiter() < 2 {
            return Err(Error::Config(format!(
                "shortest delimiter run is {}, codes need m_1 >= 2",
                self.first_delimiter()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match self {
            Family::Finite(m) => f.write_str(&join(m)),
            Family::Unbounded { listed, tail_from } if listed.is_empty() => {
                write!(f, "{tail_from}-inf")
            }
            Family::Unbounded { listed, tail_from } => write!(f, "{},{tail_from}-inf", join(listed)),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `"2,4,5"`, `"2-inf"` or `"2,4-inf"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse code family {s:?}"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let (last, init) = parts.split_last().ok_or_else(bad)?;
        let mut listed = init
            .iter()
            .map(|p| p.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let family = match last.strip_suffix("-inf").or_else(|| last.strip_suffix("-∞")) {
            Some(tail) => Family::Unbounded {
                listed,
                tail_from: tail.parse().map_err(|_| bad())?,
            },
            None => {
                listed.push(last.parse().map_err(|_| bad())?);
                Family::Finite(listed)
            }
        };
        family.validate()?;
        Ok(family)
    }
}

/// Derives the gap set `K`: run lengths below the first guaranteed delimiter
/// region that are not delimiters. For finite codes this is `[0, m_t + 1] \ M`,
/// for unbounded ones the finite complement of `M`.
pub fn derive_k(family: &Family) -> Result<Vec<u32>> {
    family.validate()?;
    let upper = match family {
        Family::Finite(m) => m[m.len() - 1] + 1,
        Family::Unbounded { tail_from, .. } => tail_from - 1,
    };
    Ok((0..=upper).filter(|&r| !family.is_delimiter_run(r)).collect())
}

/// A concrete code: delimiter family plus the derived quantities the encoder,
/// the lookup tables and the decoding automaton need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    family: Family,
    k: Vec<u32>,
    max_len: u32,
}

impl CodeSpec {
    pub fn new(family: Family) -> Result<Self> {
        let k = derive_k(&family)?;
        Ok(Self {
            family,
            k,
            max_len: DEFAULT_MAX_LEN,
        })
    }

    /// `R_{2-∞}`: every run of two or more ones delimits.
    pub fn r2_inf() -> Self {
        Self::new(Family::Unbounded {
            listed: vec![],
            tail_from: 2,
        })
        .expect("valid family")
    }

    /// `R_{2,4-∞}`: runs of exactly two, or four and more, delimit.
    pub fn r24_inf() -> Self {
        Self::new(Family::Unbounded {
            listed: vec![2],
            tail_from: 4,
        })
        .expect("valid family")
    }

    /// `R_{2,4,5}`.
    pub fn r245() -> Self {
        Self::finite(&[2, 4, 5]).expect("valid family")
    }

    pub fn finite(delimiters: &[u32]) -> Result<Self> {
        Self::new(Family::Finite(delimiters.to_vec()))
    }

    /// Caps codeword length. Lengths above 57 would not fit a 64-bit window.
    pub fn with_max_len(mut self, max_len: u32) -> Result<Self> {
        if max_len > DEFAULT_MAX_LEN || max_len < self.family.first_delimiter() + 1 {
            return Err(Error::Config(format!(
                "max_len {max_len} outside [{}, {DEFAULT_MAX_LEN}]",
                self.family.first_delimiter() + 1
            )));
        }
        self.max_len = max_len;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Ascending gap set `K`.
    pub fn k(&self) -> &[u32] {
        &self.k
    }

    /// Largest element of `K`.
    pub fn k_max(&self) -> u32 {
        *self.k.last().expect("K always contains 0")
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn first_delimiter(&self) -> u32 {
        self.family.first_delimiter()
    }

    /// Whether interior groups `0 1^s` with `s > max K` are allowed. True
    /// exactly for finite families.
    pub fn allow_long_groups(&self) -> bool {
        matches!(self.family, Family::Finite(_))
    }

    #[inline]
    pub fn is_delimiter_run(&self, run: u32) -> bool {
        self.family.is_delimiter_run(run)
    }

    /// Run length after which a start decision no longer depends on further
    /// bits: runs reaching it are delimiters (unbounded) or interior groups
    /// (finite).
    pub(crate) fn decisive_run(&self) -> u32 {
        match &self.family {
            Family::Finite(m) => m[m.len() - 1] + 1,
            Family::Unbounded { tail_from, .. } => *tail_from,
        }
    }

    /// Bits after a zero needed to decide whether it starts a codeword; also
    /// the lookahead past a byte that the start-count table consults.
    pub fn lookahead_bits(&self) -> u32 {
        self.decisive_run()
    }

    /// Number of states of the trailing-run decoding automaton: one prefix
    /// state, one state per tracked run length after a zero, and for finite
    /// codes one state for long interior groups.
    pub fn n_states(&self) -> usize {
        match &self.family {
            Family::Finite(_) => 1 + self.decisive_run() as usize + 1 + 1,
            Family::Unbounded { tail_from, .. } => 1 + *tail_from as usize,
        }
    }

    /// Canonical textual id, e.g. `"2,4-inf"`.
    pub fn id(&self) -> String {
        self.family.to_string()
    }

    /// The bit pattern appended after the last codeword: `0 1^{m_1} 0`.
    pub fn terminator(&self) -> BitString {
        BitString::zero_ones(self.first_delimiter()).concat(BitString::from_raw(0, 1))
    }

    /// Decides whether a codeword starts at bit 0 of `bits`, given `avail`
    /// valid bits. `None` when the window is too short.
    #[inline]
    pub(crate) fn start_decision(&self, bits: u64, avail: u32) -> Option<bool> {
        if avail == 0 {
            return None;
        }
        if bits & 1 == 1 {
            return Some(false);
        }
        let run = (!(bits >> 1)).trailing_zeros().min(avail - 1);
        let decisive = self.decisive_run();
        if run >= decisive {
            return Some(!self.allow_long_groups());
        }
        if 1 + run < avail {
            Some(self.is_delimiter_run(run))
        } else {
            None
        }
    }

    /// True iff bit 0 of `window` is a zero followed by a maximal run of ones
    /// whose length is a delimiter run.
    pub fn starts_codeword(&self, window: &BitString) -> Result<bool> {
        self.start_decision(window.raw(), window.len() as u32)
            .ok_or(Error::InsufficientContext(window.len()))
    }

    /// Membership test that follows the definition clause by clause: the word
    /// is `0 1^m`, or it starts with `0 1^m 0`, never ends with `0 1^m`, and
    /// contains `0 1^m 0` only as a prefix (all `m` in `M`).
    pub fn is_codeword(&self, w: &BitString) -> bool {
        let n = w.len();
        let zero_ones_at = |p: usize, m: usize| -> bool {
            p + m < n && !w.bit(p) && (p + 1..=p + m).all(|i| w.bit(i))
        };
        let delimiter_at = |p: usize, m: usize| -> bool { zero_ones_at(p, m) && p + m + 1 < n && !w.bit(p + m + 1) };
        let delims = || (1..n).filter(|&m| self.is_delimiter_run(m as u32));

        if n >= 2 && delims().any(|m| m + 1 == n && zero_ones_at(0, m)) {
            return true;
        }
        if !delims().any(|m| delimiter_at(0, m)) {
            return false;
        }
        if delims().any(|m| zero_ones_at(n - m - 1, m)) {
            return false;
        }
        !(1..n).any(|p| delims().any(|m| delimiter_at(p, m)))
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{{{}}}", self.family)
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodeSpec::new(s.parse()?)
    }
}
