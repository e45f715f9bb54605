//! Almost-disjoint subsets of ℕ from branches of the binary tree.
//!
//! Each branch (an infinite bit sequence) is sent to the set of codes of its
//! finite prefixes. Two branches that first differ at position `p` share
//! exactly the `p − 1` codes of their common prefixes, so the family is
//! pairwise almost disjoint with intersection sizes known in advance.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dissociate::Letter;

/// Bits inspected when looking for the first difference between two seeds.
pub const DEFAULT_HORIZON: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("cannot parse seed {0:?}; expected \"prefix=<bits>,period=<bits>\" or \"prng=<u64>\"")]
    ParseSeed(String),
    #[error("set size must be between 1 and 62, got {0}")]
    BadSize(usize),
    #[error("seeds agree on the first {0} bits")]
    Indistinguishable(usize),
    #[error("code {code} exceeds the master enumeration of {len} letters")]
    CodeOutOfRange { code: u64, len: usize },
}

/// A reproducible infinite bit sequence naming one branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BranchSeed {
    /// `prefix` followed by `period` repeated forever.
    Periodic {
        prefix: Vec<bool>,
        period: Vec<bool>,
    },
    /// Bits drawn from ChaCha8 seeded with this value, least significant bit first.
    Prng(u64),
}

impl BranchSeed {
    pub fn periodic(prefix: &str, period: &str) -> Result<Self, FamilyError> {
        let text = format!("prefix={prefix},period={period}");
        let p = parse_bits(prefix).ok_or_else(|| FamilyError::ParseSeed(text.clone()))?;
        let q = parse_bits(period).ok_or_else(|| FamilyError::ParseSeed(text.clone()))?;
        if q.is_empty() {
            return Err(FamilyError::ParseSeed(text));
        }
        Ok(BranchSeed::Periodic {
            prefix: p,
            period: q,
        })
    }

    /// The first `n` bits.
    pub fn bits(&self, n: usize) -> Vec<bool> {
        match self {
            BranchSeed::Periodic { prefix, period } => (0..n)
                .map(|i| {
                    if i < prefix.len() {
                        prefix[i]
                    } else {
                        period[(i - prefix.len()) % period.len()]
                    }
                })
                .collect(),
            BranchSeed::Prng(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut out = Vec::with_capacity(n);
                while out.len() < n {
                    let word = rng.next_u64();
                    out.extend((0..64).map(|b| (word >> b) & 1 == 1).take(n - out.len()));
                }
                out
            }
        }
    }
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for BranchSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchSeed::Periodic { prefix, period } => write!(
                f,
                "prefix={},period={}",
                bits_to_string(prefix),
                bits_to_string(period)
            ),
            BranchSeed::Prng(seed) => write!(f, "prng={seed}"),
        }
    }
}

impl FromStr for BranchSeed {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FamilyError::ParseSeed(s.to_string());
        let s = s.trim();
        if let Some(v) = s.strip_prefix("prng=") {
            return v.parse().map(BranchSeed::Prng).map_err(|_| err());
        }
        let (mut prefix, mut period) = (None, None);
        for part in s.split(',') {
            match part.trim().split_once('=') {
                Some(("prefix", v)) if prefix.is_none() => prefix = Some(v),
                Some(("period", v)) if period.is_none() => period = Some(v),
                _ => return Err(err()),
            }
        }
        BranchSeed::periodic(prefix.unwrap_or(""), period.ok_or_else(err)?).map_err(|_| err())
    }
}

impl Serialize for BranchSeed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BranchSeed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `2^{|s|} − 1 + value(s)` for a nonempty bit string read most significant bit first.
pub fn code(bits: &[bool]) -> u64 {
    debug_assert!(!bits.is_empty() && bits.len() < 64);
    let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    (1u64 << bits.len()) - 1 + value
}

/// Inverse of [`code`] on positive integers.
pub fn decode(code: u64) -> Vec<bool> {
    assert!(code >= 1, "codes start at 1");
    let len = (63 - (code + 1).leading_zeros()) as usize;
    let value = code + 1 - (1u64 << len);
    (0..len).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Finite fragment of the almost-disjoint set attached to one branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdSet {
    pub seed: BranchSeed,
    pub n: usize,
    pub codes: Vec<u64>,
}

/// Codes of the first `n` prefixes of the branch named by `seed`.
pub fn ad_set(seed: &BranchSeed, n: usize) -> Result<AdSet, FamilyError> {
    if n == 0 || n > 62 {
        return Err(FamilyError::BadSize(n));
    }
    let bits = seed.bits(n);
    let codes = (1..=n).map(|k| code(&bits[..k])).collect();
    Ok(AdSet {
        seed: seed.clone(),
        n,
        codes,
    })
}

/// Largest `n` such that every code of `ad_set(seed, n)` is at most `limit`.
pub fn prefixes_within(seed: &BranchSeed, limit: u64) -> usize {
    let bits = seed.bits(62);
    (1..=62)
        .take_while(|&k| code(&bits[..k]) <= limit)
        .last()
        .unwrap_or(0)
}

/// Number of shared prefixes, i.e. one less than the first differing (1-based) bit position.
pub fn intersection_bound(
    a: &BranchSeed,
    b: &BranchSeed,
    horizon: usize,
) -> Result<usize, FamilyError> {
    let (x, y) = (a.bits(horizon), b.bits(horizon));
    x.iter()
        .zip(&y)
        .position(|(p, q)| p != q)
        .ok_or(FamilyError::Indistinguishable(horizon))
}

/// Letters selected from a master enumeration by an [`AdSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetterFamily {
    pub letters: Vec<Letter>,
    /// 1-based positions in the master enumeration.
    pub master_positions: Vec<u64>,
    /// Rank of each letter inside the family, starting at 1.
    pub index: Vec<usize>,
}

/// Picks θ_m for every code m of `set` from the 1-based `master` list; the
/// k-th smallest code gets index k.
pub fn letters_for(master: &[Letter], set: &AdSet) -> Result<LetterFamily, FamilyError> {
    let mut codes = set.codes.clone();
    codes.sort_unstable();
    let letters = codes
        .iter()
        .map(|&c| {
            master
                .get((c as usize).wrapping_sub(1))
                .cloned()
                .ok_or(FamilyError::CodeOutOfRange {
                    code: c,
                    len: master.len(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LetterFamily {
        index: (1..=letters.len()).collect(),
        letters,
        master_positions: codes,
    })
}
