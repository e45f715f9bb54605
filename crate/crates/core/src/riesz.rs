//! Riesz products through their Fourier–Stieltjes coefficients.
//!
//! For a dissociate letter set Θ and coefficients `a(θ)`, the Riesz product is
//! the weak-* limit of `∏ q_θ` with `q_θ = 1 + a(θ)θ + conj(a(θ)θ)` (or
//! `1 + a(θ)θ` for involutions). Its transform is 1 at the identity,
//! `∏ a(θ_i)^{(ε_i)}` on the word `∏ θ_i^{ε_i}` (conjugated where `ε_i = −1`)
//! and 0 elsewhere. The limit measure is never materialized; only coefficient
//! systems and finitely supported transforms are.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::dissociate::{
    decompose, enumerate_words, is_dissociate, DissociateError, DissociateOutcome, FormalWord,
    Letter, Sign,
};
use crate::dualgroup::{DualGroup, GroupElement};

/// Margin keeping involutive default-family coefficients strictly inside `(−1, 1)`.
pub const INVOLUTION_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RieszError {
    #[error(transparent)]
    Dissociate(#[from] DissociateError),
    #[error("letters are not dissociate at word length {0}")]
    NotDissociate(usize),
    #[error("{letters} letters but {coeffs} coefficients")]
    LengthMismatch { letters: usize, coeffs: usize },
    #[error("coefficient bounds violated: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("index {0} must be at least 1")]
    ZeroIndex(usize),
    #[error("{requested} letters requested but the word length bound is {max_len}")]
    SubsetTooLarge { requested: usize, max_len: usize },
    #[error("letter index {0} out of range")]
    LetterOutOfRange(usize),
    #[error("transforms live on different groups: {0} and {1}")]
    GroupMismatch(String, String),
    #[error("operation requires real coefficients")]
    NotHermitian,
    #[error("power must be at least 1")]
    ZeroPower,
    #[error("{requested} terms requested but the spec has {available} letters")]
    TooFewLetters { requested: usize, available: usize },
}

/// How the coefficients of a spec were produced; recorded in serialized specs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffRule {
    /// `min(1/ln(b+5), clamp)` with `b` the 1-based rank of each letter.
    DefaultFamily {
        index: Vec<usize>,
    },
    Constant {
        value: f64,
    },
    /// `a(θ)^power` of a default-family or constant spec.
    Power {
        base: Box<CoeffRule>,
        power: u32,
    },
    Table,
}

/// A letter set with its coefficient function; determines one Riesz product.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszSpec {
    group: DualGroup,
    letters: Vec<Letter>,
    coeffs: Vec<Complex64>,
    level: usize,
    rule: CoeffRule,
    fragment: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub letter: usize,
    pub re: f64,
    pub im: f64,
    pub reason: String,
}

impl RieszSpec {
    /// Builds a spec over a letter list verified dissociate at word length `level`.
    ///
    /// Coefficient bounds are not enforced here; see [`validate_spec`].
    pub fn new(
        group: DualGroup,
        letters: Vec<Letter>,
        coeffs: Vec<Complex64>,
        level: usize,
    ) -> Result<Self, RieszError> {
        if letters.len() != coeffs.len() {
            return Err(RieszError::LengthMismatch {
                letters: letters.len(),
                coeffs: coeffs.len(),
            });
        }
        if is_dissociate(&group, &letters, level)? != DissociateOutcome::Verified {
            return Err(RieszError::NotDissociate(level));
        }
        Ok(RieszSpec {
            group,
            letters,
            coeffs,
            level,
            rule: CoeffRule::Table,
            fragment: false,
        })
    }

    /// Every letter gets the same real coefficient.
    pub fn constant(
        group: DualGroup,
        letters: Vec<Letter>,
        value: f64,
        level: usize,
    ) -> Result<Self, RieszError> {
        let coeffs = vec![Complex64::new(value, 0.0); letters.len()];
        let mut spec = Self::new(group, letters, coeffs, level)?;
        spec.rule = CoeffRule::Constant { value };
        Ok(spec)
    }

    /// The coefficient family `a(θ) = 1/ln(b(θ)+5)`, clamped per letter type.
    ///
    /// The letters are treated as the first terms of an infinite family, so
    /// transforms built from this spec are marked truncated.
    pub fn default_family(
        group: DualGroup,
        letters: Vec<Letter>,
        index: Vec<usize>,
        level: usize,
    ) -> Result<Self, RieszError> {
        if index.len() != letters.len() {
            return Err(RieszError::LengthMismatch {
                letters: letters.len(),
                coeffs: index.len(),
            });
        }
        let coeffs = letters
            .iter()
            .zip(&index)
            .map(|(l, &b)| default_family_coefficients(b, l.is_involution()).map(|a| a.into()))
            .collect::<Result<Vec<Complex64>, _>>()?;
        let mut spec = Self::new(group, letters, coeffs, level)?;
        spec.rule = CoeffRule::DefaultFamily { index };
        spec.fragment = true;
        Ok(spec)
    }

    /// Marks the letters as a finite fragment of an infinite letter set.
    pub fn into_fragment(mut self) -> Self {
        self.fragment = true;
        self
    }

    pub fn group(&self) -> &DualGroup {
        &self.group
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn rule(&self) -> &CoeffRule {
        &self.rule
    }

    pub fn is_fragment(&self) -> bool {
        self.fragment
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().all(|a| a.im == 0.0)
    }

    /// `∏ a(θ_i)` over the word, conjugating factors with exponent −1.
    pub fn word_value(&self, word: &FormalWord) -> Complex64 {
        word.factors()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &(i, s)| {
                acc * match s {
                    Sign::Plus => self.coeffs[i],
                    Sign::Minus => self.coeffs[i].conj(),
                }
            })
    }

    fn ensure_valid(&self) -> Result<(), RieszError> {
        let v = validate_spec(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(RieszError::Invalid(v))
        }
    }

    /// Transform restricted to Ω_L(Θ) with `L = max_len`.
    pub fn truncated_transform(&self, max_len: usize) -> Result<SparseTransform, RieszError> {
        self.ensure_valid()?;
        let words = enumerate_words(&self.group, &self.letters, max_len)?;
        let complete = !self.fragment && max_len >= self.letters.len();
        let support = if complete {
            Support::Exact
        } else {
            Support::Truncated { level: max_len }
        };
        let values = words
            .entries()
            .iter()
            .map(|(el, w)| (el.clone(), self.word_value(w)))
            .collect();
        Ok(SparseTransform::from_map(
            self.group.clone(),
            values,
            support,
        ))
    }
}

impl Serialize for RieszSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            re: f64,
            im: f64,
        }
        let letters: Vec<String> = self
            .letters
            .iter()
            .map(|l| self.group.display(l.element()))
            .collect();
        let table: Vec<Entry> = self
            .coeffs
            .iter()
            .map(|c| Entry { re: c.re, im: c.im })
            .collect();
        let mut st = s.serialize_struct("RieszSpec", 6)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("letters", &letters)?;
        st.serialize_field("rule", &self.rule)?;
        st.serialize_field("coeffs", &table)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("fragment", &self.fragment)?;
        st.end()
    }
}

/// Checks `−1 < a < 1` (real) for involutions and `|a| ≤ 1/2` otherwise.
pub fn validate_spec(spec: &RieszSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, (l, a)) in spec.letters.iter().zip(&spec.coeffs).enumerate() {
        let reason = if !a.re.is_finite() || !a.im.is_finite() {
            Some("coefficient is not finite")
        } else if l.is_involution() {
            if a.im != 0.0 {
                Some("involutive letter needs a real coefficient")
            } else if !(-1.0 < a.re && a.re < 1.0) {
                Some("involutive coefficient outside (-1, 1)")
            } else {
                None
            }
        } else if a.norm() > 0.5 {
            Some("coefficient modulus exceeds 1/2")
        } else {
            None
        };
        if let Some(r) = reason {
            out.push(Violation {
                letter: i,
                re: a.re,
                im: a.im,
                reason: r.into(),
            });
        }
    }
    out
}

/// Value of a transform coefficient, distinguishing a proven zero from a
/// search that stopped at the word length bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Value(Complex64),
    Zero,
    TruncatedZero,
}

impl Coefficient {
    pub fn value(self) -> Complex64 {
        match self {
            Coefficient::Value(v) => v,
            Coefficient::Zero | Coefficient::TruncatedZero => Complex64::new(0.0, 0.0),
        }
    }
}

/// Fourier–Stieltjes coefficient at `omega`, searching words of length `≤ max_len`.
pub fn coefficient(spec: &RieszSpec, omega: &GroupElement, max_len: usize) -> Coefficient {
    if omega.is_identity() {
        return Coefficient::Value(Complex64::new(1.0, 0.0));
    }
    match decompose(&spec.group, &spec.letters, omega, max_len) {
        Some(w) => Coefficient::Value(spec.word_value(&w)),
        None if !spec.fragment && max_len >= spec.letters.len() => Coefficient::Zero,
        None => Coefficient::TruncatedZero,
    }
}

/// Exact transform of the partial product `P_Φ = ∏_{θ∈Φ} q_θ`, Φ given by letter indices.
pub fn partial_transform(
    spec: &RieszSpec,
    subset: &[usize],
    max_len: usize,
) -> Result<SparseTransform, RieszError> {
    if subset.len() > max_len {
        return Err(RieszError::SubsetTooLarge {
            requested: subset.len(),
            max_len,
        });
    }
    spec.ensure_valid()?;
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= spec.letters.len()) {
        return Err(RieszError::LetterOutOfRange(bad));
    }
    let letters: Vec<Letter> = idx.iter().map(|&i| spec.letters[i].clone()).collect();
    let coeffs: Vec<Complex64> = idx.iter().map(|&i| spec.coeffs[i]).collect();
    let words = enumerate_words(&spec.group, &letters, letters.len().max(1))?;
    let values = words
        .entries()
        .iter()
        .map(|(el, w)| {
            let v = w
                .factors()
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &(i, s)| {
                    acc * match s {
                        Sign::Plus => coeffs[i],
                        Sign::Minus => coeffs[i].conj(),
                    }
                });
            (el.clone(), v)
        })
        .collect();
    Ok(SparseTransform::from_map(
        spec.group.clone(),
        values,
        Support::Exact,
    ))
}

/// `min(1/ln(b+5), clamp)`: the clamp is 1/2 for ordinary letters and
/// `1 − 10⁻⁶` for involutions.
pub fn default_family_coefficients(b: usize, involutive: bool) -> Result<f64, RieszError> {
    if b == 0 {
        return Err(RieszError::ZeroIndex(b));
    }
    let raw = 1.0 / ((b as f64) + 5.0).ln();
    let clamp = if involutive {
        1.0 - INVOLUTION_MARGIN
    } else {
        0.5
    };
    Ok(raw.min(clamp))
}

/// Whether a transform's support is fully known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Exact,
    /// Only words of length `≤ level` were enumerated.
    Truncated {
        level: usize,
    },
}

/// A finitely supported map Γ → ℂ with no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTransform {
    group: DualGroup,
    values: BTreeMap<GroupElement, Complex64>,
    support: Support,
}

impl SparseTransform {
    pub fn from_map(
        group: DualGroup,
        values: BTreeMap<GroupElement, Complex64>,
        support: Support,
    ) -> Self {
        let values = values
            .into_iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .collect();
        SparseTransform {
            group,
            values,
            support,
        }
    }

    /// Transform of the unit point mass: 1 at the identity.
    pub fn unit(group: DualGroup) -> Self {
        let mut values = BTreeMap::new();
        values.insert(group.identity(), Complex64::new(1.0, 0.0));
        SparseTransform {
            group,
            values,
            support: Support::Exact,
        }
    }

    pub fn group(&self) -> &DualGroup {
        &self.group
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn values(&self) -> &BTreeMap<GroupElement, Complex64> {
        &self.values
    }

    pub fn get(&self, el: &GroupElement) -> Complex64 {
        self.values
            .get(el)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the identity, i.e. the total mass.
    pub fn mass(&self) -> Complex64 {
        self.get(&self.group.identity())
    }

    pub fn is_real(&self) -> bool {
        self.values.values().all(|v| v.im == 0.0)
    }
}

impl Serialize for SparseTransform {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            element: String,
            re: f64,
            im: f64,
        }
        let values: Vec<Entry> = self
            .values
            .iter()
            .map(|(el, v)| Entry {
                element: self.group.display(el),
                re: v.re,
                im: v.im,
            })
            .collect();
        let mut st = s.serialize_struct("SparseTransform", 3)?;
        st.serialize_field("group", &self.group)?;
        st.serialize_field("support", &self.support)?;
        st.serialize_field("values", &values)?;
        st.end()
    }
}

fn same_group(a: &SparseTransform, b: &SparseTransform) -> Result<(), RieszError> {
    if a.group != b.group {
        return Err(RieszError::GroupMismatch(
            a.group.to_string(),
            b.group.to_string(),
        ));
    }
    Ok(())
}

fn meet(a: Support, b: Support) -> Support {
    match (a, b) {
        (Support::Exact, Support::Exact) => Support::Exact,
        (Support::Truncated { level }, Support::Exact)
        | (Support::Exact, Support::Truncated { level }) => Support::Truncated { level },
        (Support::Truncated { level: x }, Support::Truncated { level: y }) => {
            Support::Truncated { level: x.min(y) }
        }
    }
}

/// Transform of the convolution of two measures: the pointwise product.
pub fn convolve(a: &SparseTransform, b: &SparseTransform) -> Result<SparseTransform, RieszError> {
    same_group(a, b)?;
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let values = small
        .values
        .iter()
        .filter_map(|(el, v)| large.values.get(el).map(|w| (el.clone(), v * w)))
        .collect();
    Ok(SparseTransform::from_map(
        a.group.clone(),
        values,
        meet(a.support, b.support),
    ))
}

/// Transform of the pointwise product of two trigonometric polynomials: the
/// convolution of their coefficient maps over Γ.
pub fn multiply(a: &SparseTransform, b: &SparseTransform) -> Result<SparseTransform, RieszError> {
    same_group(a, b)?;
    let mut values: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
    for (x, u) in &a.values {
        for (y, v) in &b.values {
            *values
                .entry(a.group.combine_unchecked(x, y))
                .or_insert(Complex64::new(0.0, 0.0)) += u * v;
        }
    }
    Ok(SparseTransform::from_map(
        a.group.clone(),
        values,
        meet(a.support, b.support),
    ))
}

/// The spec of `μ^{*n}`: every coefficient raised to the n-th power.
pub fn transform_power(spec: &RieszSpec, n: u32) -> Result<RieszSpec, RieszError> {
    if n == 0 {
        return Err(RieszError::ZeroPower);
    }
    if !spec.is_hermitian() {
        return Err(RieszError::NotHermitian);
    }
    spec.ensure_valid()?;
    let mut out = spec.clone();
    out.coeffs = spec.coeffs.iter().map(|a| a.powu(n)).collect();
    if n > 1 {
        out.rule = CoeffRule::Power {
            base: Box::new(spec.rule.clone()),
            power: n,
        };
    }
    Ok(out)
}

/// Partial sum `Σ_{|a|<1/2} |a|^{2n} + Σ_{|a|>1/2} (1 − |a|)` over the given moduli.
pub fn ip_criterion_sum<I: IntoIterator<Item = f64>>(moduli: I, n: u32) -> f64 {
    moduli
        .into_iter()
        .map(|a| {
            if a < 0.5 {
                a.powi(2 * n as i32)
            } else if a > 0.5 {
                1.0 - a
            } else {
                0.0
            }
        })
        .sum()
}

/// The independent-powers criterion summed over the first `terms` letters.
pub fn ip_criterion_partial(spec: &RieszSpec, terms: usize, n: u32) -> Result<f64, RieszError> {
    if terms > spec.letters.len() {
        return Err(RieszError::TooFewLetters {
            requested: terms,
            available: spec.letters.len(),
        });
    }
    if n == 0 {
        return Err(RieszError::ZeroPower);
    }
    Ok(ip_criterion_sum(
        spec.coeffs[..terms].iter().map(|a| a.norm()),
        n,
    ))
}
