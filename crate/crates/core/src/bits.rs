//! Computational-basis labels.
//!
//! Party 0 is the leftmost character of the textual form and the most
//! significant bit of the dense index, matching the Kronecker ordering
//! `q0 ⊗ q1 ⊗ ... ⊗ q(n-1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fixed-length string of classical bits, one per party.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    /// Builds the label of dense basis index `index` on `len` qubits.
    pub fn from_index(len: usize, index: usize) -> Self {
        let mut b = Self::zeros(len);
        for party in 0..len {
            if (index >> (len - 1 - party)) & 1 == 1 {
                b.set(party, true);
            }
        }
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Label with ones exactly at `parties`.
    pub fn with_ones(len: usize, parties: &[usize]) -> Self {
        let mut b = Self::zeros(len);
        for &p in parties {
            b.set(p, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, party: usize) -> bool {
        debug_assert!(party < self.len);
        (self.words[party / 64] >> (party % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, party: usize, value: bool) {
        debug_assert!(party < self.len);
        let mask = 1u64 << (party % 64);
        if value {
            self.words[party / 64] |= mask;
        } else {
            self.words[party / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Dense index; only meaningful for `len <= usize::BITS`.
    pub fn to_index(&self) -> usize {
        (0..self.len).fold(0usize, |acc, p| (acc << 1) | self.get(p) as usize)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = Self::zeros(self.len + other.len);
        for p in 0..self.len {
            out.set(p, self.get(p));
        }
        for p in 0..other.len {
            out.set(self.len + p, other.get(p));
        }
        out
    }

    /// The bits at `parties`, in the given order.
    pub fn select(&self, parties: &[usize]) -> BitString {
        let mut out = Self::zeros(parties.len());
        for (i, &p) in parties.iter().enumerate() {
            out.set(i, self.get(p));
        }
        out
    }

    /// Appends one bit.
    pub fn push(&self, value: bool) -> BitString {
        let mut out = Self::zeros(self.len + 1);
        for p in 0..self.len {
            out.set(p, self.get(p));
        }
        out.set(self.len, value);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |p| self.get(p))
    }
}

/// Shorter strings first, then textual order (party 0 most significant).
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len.cmp(&other.len).then_with(|| {
            (0..self.len)
                .map(|p| self.get(p).cmp(&other.get(p)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
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
        write!(f, "|{self}>")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty bitstring".into()));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit `{other}` in `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }
}
