//! Discrete abelian groups that arise as duals of compact groups.
//!
//! A [`DualGroup`] describes one of ℤ, ℤ^d, the countable direct sums ⊕ℤ₂ and
//! ⊕ℤ_m, or a finite product of these. Nested products are flattened into a
//! list of factors at construction, so every coordinate is addressed by a
//! `(factor, index)` pair. Elements are written additively and stored sparsely.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("lattice rank must be at least 1")]
    ZeroRank,
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("empty product")]
    EmptyProduct,
    #[error("coordinate ({factor}, {index}) is not valid for {group}")]
    InvalidCoordinate {
        factor: usize,
        index: u64,
        group: String,
    },
    #[error("element is not in canonical form for {0}")]
    NotCanonical(String),
    #[error("the identity is not a valid letter")]
    IdentityLetter,
    #[error("cannot parse group descriptor {0:?}")]
    ParseGroup(String),
    #[error("cannot parse element {text:?} of {group}")]
    ParseElement { text: String, group: String },
}

/// A single (non-product) factor of a dual group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    /// ℤ, one coordinate.
    Integer,
    /// ℤ^d.
    Lattice(usize),
    /// ⊕ℤ₂ over countably many coordinates.
    SumOrderTwo,
    /// ⊕ℤ_m over countably many coordinates.
    SumOrderM(u64),
}

impl Factor {
    /// Modulus of each coordinate, or `None` for ℤ coordinates.
    pub fn modulus(self) -> Option<u64> {
        match self {
            Factor::Integer | Factor::Lattice(_) => None,
            Factor::SumOrderTwo => Some(2),
            Factor::SumOrderM(m) => Some(m),
        }
    }

    fn valid_index(self, index: u64) -> bool {
        match self {
            Factor::Integer => index == 0,
            Factor::Lattice(d) => index < d as u64,
            Factor::SumOrderTwo | Factor::SumOrderM(_) => true,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Integer => write!(f, "Z"),
            Factor::Lattice(d) => write!(f, "Z^{d}"),
            Factor::SumOrderTwo => write!(f, "sumZ2"),
            Factor::SumOrderM(m) => write!(f, "sumZ({m})"),
        }
    }
}

/// Descriptor of the nested form accepted by [`DualGroup::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    IntegerGroup,
    IntegerLattice(usize),
    DirectSumOrderTwo,
    DirectSumOrderM(u64),
    Product(Vec<GroupKind>),
}

/// A discrete abelian group Γ, normalized to a flat list of factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualGroup {
    factors: Vec<Factor>,
}

impl DualGroup {
    pub fn new(kind: GroupKind) -> Result<Self, GroupError> {
        let mut factors = Vec::new();
        flatten(kind, &mut factors)?;
        Ok(DualGroup { factors })
    }

    pub fn integers() -> Self {
        DualGroup {
            factors: vec![Factor::Integer],
        }
    }

    pub fn sum_order_two() -> Self {
        DualGroup {
            factors: vec![Factor::SumOrderTwo],
        }
    }

    pub fn lattice(d: usize) -> Result<Self, GroupError> {
        Self::new(GroupKind::IntegerLattice(d))
    }

    pub fn sum_order_m(m: u64) -> Result<Self, GroupError> {
        Self::new(GroupKind::DirectSumOrderM(m))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn is_integers(&self) -> bool {
        self.factors == [Factor::Integer]
    }

    pub fn is_sum_order_two(&self) -> bool {
        self.factors == [Factor::SumOrderTwo]
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::default()
    }

    /// Group product, written additively.
    pub fn combine(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.combine_unchecked(x, y))
    }

    pub fn invert(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(x)?;
        Ok(self.invert_unchecked(x))
    }

    /// `x + x == 0`. The identity is rejected since letters are never the identity.
    pub fn is_involution(&self, x: &GroupElement) -> Result<bool, GroupError> {
        self.check(x)?;
        if x.is_identity() {
            return Err(GroupError::IdentityLetter);
        }
        Ok(self.combine_unchecked(x, x).is_identity())
    }

    /// Verifies that every coordinate of `x` exists in this group and that `x` is canonical.
    pub fn check(&self, x: &GroupElement) -> Result<(), GroupError> {
        for (c, v) in &x.coords {
            let factor = self.factor_of(*c)?;
            if v.is_zero() {
                return Err(GroupError::NotCanonical(self.to_string()));
            }
            if let Some(m) = factor.modulus() {
                if v.is_negative() || *v >= BigInt::from(m) {
                    return Err(GroupError::NotCanonical(self.to_string()));
                }
            }
        }
        if x.coords.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(GroupError::NotCanonical(self.to_string()));
        }
        Ok(())
    }

    /// Builds a canonical element from arbitrary `(coordinate, value)` pairs,
    /// summing repeated coordinates and reducing residues.
    pub fn element<I>(&self, entries: I) -> Result<GroupElement, GroupError>
    where
        I: IntoIterator<Item = (Coord, BigInt)>,
    {
        let mut acc = GroupElement::default();
        for (c, v) in entries {
            self.factor_of(c)?;
            let single = GroupElement {
                coords: vec![(c, v)],
            };
            acc = self.combine_unchecked(&acc, &self.reduce(single));
        }
        Ok(acc)
    }

    /// The element with value 1 at coordinate `(factor, index)`.
    pub fn basis(&self, factor: usize, index: u64) -> Result<GroupElement, GroupError> {
        self.element([(Coord { factor, index }, BigInt::one())])
    }

    /// An integer viewed as an element of ℤ (first factor, coordinate 0).
    pub fn integer(&self, n: impl Into<BigInt>) -> Result<GroupElement, GroupError> {
        self.element([(
            Coord {
                factor: 0,
                index: 0,
            },
            n.into(),
        )])
    }

    pub(crate) fn combine_unchecked(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let mut out = Vec::with_capacity(x.coords.len() + y.coords.len());
        let (mut i, mut j) = (0, 0);
        while i < x.coords.len() || j < y.coords.len() {
            let take = match (x.coords.get(i), y.coords.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match take {
                std::cmp::Ordering::Less => {
                    out.push(x.coords[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(y.coords[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = x.coords[i].0;
                    let mut v = &x.coords[i].1 + &y.coords[j].1;
                    if let Some(m) = self.factors[c.factor].modulus() {
                        v = v.mod_floor(&BigInt::from(m));
                    }
                    if !v.is_zero() {
                        out.push((c, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        GroupElement { coords: out }
    }

    pub(crate) fn invert_unchecked(&self, x: &GroupElement) -> GroupElement {
        let coords = x
            .coords
            .iter()
            .map(|(c, v)| match self.factors[c.factor].modulus() {
                Some(m) => (*c, (BigInt::from(m) - v).mod_floor(&BigInt::from(m))),
                None => (*c, -v),
            })
            .filter(|(_, v)| !v.is_zero())
            .collect();
        GroupElement { coords }
    }

    fn reduce(&self, mut x: GroupElement) -> GroupElement {
        for (c, v) in x.coords.iter_mut() {
            if let Some(m) = self.factors[c.factor].modulus() {
                *v = v.mod_floor(&BigInt::from(m));
            }
        }
        x.coords.retain(|(_, v)| !v.is_zero());
        x
    }

    fn factor_of(&self, c: Coord) -> Result<Factor, GroupError> {
        self.factors
            .get(c.factor)
            .copied()
            .filter(|f| f.valid_index(c.index))
            .ok_or_else(|| GroupError::InvalidCoordinate {
                factor: c.factor,
                index: c.index,
                group: self.to_string(),
            })
    }

    /// Parses an element in the notation produced by [`DualGroup::display`].
    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let err = || GroupError::ParseElement {
            text: text.to_string(),
            group: self.to_string(),
        };
        let text = text.trim();
        let parts: Vec<&str> = if self.factors.len() == 1 {
            vec![text]
        } else {
            let inner = text
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(err)?;
            inner.split(';').map(str::trim).collect()
        };
        if parts.len() != self.factors.len() {
            return Err(err());
        }
        let mut entries = Vec::new();
        for (fi, (factor, part)) in self.factors.iter().zip(parts).enumerate() {
            parse_factor_element(*factor, fi, part, &mut entries).ok_or_else(err)?;
        }
        self.element(entries)
    }

    /// Human-readable form of an element, e.g. `12`, `(0,3)`, `e1+e4`, `(5; e2)`.
    pub fn display(&self, x: &GroupElement) -> String {
        let parts: Vec<String> = self
            .factors
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let entries: Vec<&(Coord, BigInt)> =
                    x.coords.iter().filter(|(c, _)| c.factor == fi).collect();
                display_factor(*f, &entries)
            })
            .collect();
        if parts.len() == 1 {
            parts.into_iter().next().unwrap_or_default()
        } else {
            format!("({})", parts.join("; "))
        }
    }
}

fn flatten(kind: GroupKind, out: &mut Vec<Factor>) -> Result<(), GroupError> {
    match kind {
        GroupKind::IntegerGroup => out.push(Factor::Integer),
        GroupKind::IntegerLattice(0) => return Err(GroupError::ZeroRank),
        GroupKind::IntegerLattice(d) => out.push(Factor::Lattice(d)),
        GroupKind::DirectSumOrderTwo => out.push(Factor::SumOrderTwo),
        GroupKind::DirectSumOrderM(m) if m < 2 => return Err(GroupError::BadModulus(m)),
        GroupKind::DirectSumOrderM(2) => out.push(Factor::SumOrderTwo),
        GroupKind::DirectSumOrderM(m) => out.push(Factor::SumOrderM(m)),
        GroupKind::Product(parts) => {
            if parts.is_empty() {
                return Err(GroupError::EmptyProduct);
            }
            for p in parts {
                flatten(p, out)?;
            }
        }
    }
    Ok(())
}

fn display_factor(f: Factor, entries: &[&(Coord, BigInt)]) -> String {
    match f {
        Factor::Integer => entries
            .first()
            .map(|(_, v)| v.to_string())
            .unwrap_or_else(|| "0".into()),
        Factor::Lattice(d) => {
            let mut vals = vec![BigInt::zero(); d];
            for (c, v) in entries {
                vals[c.index as usize] = v.clone();
            }
            let s: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
            format!("({})", s.join(","))
        }
        Factor::SumOrderTwo | Factor::SumOrderM(_) => {
            if entries.is_empty() {
                return "0".into();
            }
            let s: Vec<String> = entries
                .iter()
                .map(|(c, v)| {
                    if v.is_one() {
                        format!("e{}", c.index)
                    } else {
                        format!("{v}e{}", c.index)
                    }
                })
                .collect();
            s.join("+")
        }
    }
}

fn parse_factor_element(
    f: Factor,
    fi: usize,
    part: &str,
    out: &mut Vec<(Coord, BigInt)>,
) -> Option<()> {
    let coord = |index| Coord { factor: fi, index };
    match f {
        Factor::Integer => out.push((coord(0), part.parse().ok()?)),
        Factor::Lattice(d) => {
            let inner = part.strip_prefix('(')?.strip_suffix(')')?;
            let vals: Vec<&str> = inner.split(',').map(str::trim).collect();
            if vals.len() != d {
                return None;
            }
            for (i, v) in vals.iter().enumerate() {
                out.push((coord(i as u64), v.parse().ok()?));
            }
        }
        Factor::SumOrderTwo | Factor::SumOrderM(_) => {
            if part == "0" {
                return Some(());
            }
            for term in part.split('+').map(str::trim) {
                let pos = term.find('e')?;
                let (mult, idx) = term.split_at(pos);
                let v: BigInt = if mult.is_empty() {
                    BigInt::one()
                } else {
                    mult.parse().ok()?
                };
                out.push((coord(idx[1..].parse().ok()?), v));
            }
        }
    }
    Some(())
}

impl fmt::Display for DualGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for DualGroup {
    type Err = GroupError;

    /// Accepts `Z`, `Z^d`, `sumZ2`, `sumZ(m)` and `x`-separated products such as `ZxsumZ2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || GroupError::ParseGroup(s.to_string());
        let mut kinds = Vec::new();
        for part in s.trim().split('x') {
            let kind = match part.trim() {
                "Z" => GroupKind::IntegerGroup,
                "sumZ2" => GroupKind::DirectSumOrderTwo,
                p if p.starts_with("Z^") => {
                    GroupKind::IntegerLattice(p[2..].parse().map_err(|_| err())?)
                }
                p if p.starts_with("sumZ(") && p.ends_with(')') => {
                    GroupKind::DirectSumOrderM(p[5..p.len() - 1].parse().map_err(|_| err())?)
                }
                _ => return Err(err()),
            };
            kinds.push(kind);
        }
        let kind = if kinds.len() == 1 {
            kinds.pop().ok_or_else(err)?
        } else {
            GroupKind::Product(kinds)
        };
        DualGroup::new(kind)
    }
}

impl Serialize for DualGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DualGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Address of one coordinate: the factor it belongs to and its index inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub factor: usize,
    pub index: u64,
}

/// An element of a [`DualGroup`] in canonical form: coordinates sorted, no
/// zero entries, residues in `[0, m)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<(Coord, BigInt)>,
}

impl GroupElement {
    pub fn is_identity(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[(Coord, BigInt)] {
        &self.coords
    }

    /// The value at ℤ-coordinate `(0, 0)` when the element lives in ℤ and fits an `i64`.
    pub fn as_i64(&self) -> Option<i64> {
        match self.coords.as_slice() {
            [] => Some(0),
            [(c, v)] if c.factor == 0 && c.index == 0 => v.to_i64(),
            _ => None,
        }
    }

    /// If the element is a single basis vector `e_index` with value 1, its index.
    pub fn basis_index(&self) -> Option<u64> {
        match self.coords.as_slice() {
            [(c, v)] if c.factor == 0 && v.is_one() => Some(c.index),
            _ => None,
        }
    }
}
