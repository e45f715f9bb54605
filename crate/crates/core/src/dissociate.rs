//! Words over a letter set and exhaustive dissociativity checks.
//!
//! A word is a product of distinct letters, each raised to `+1` or `-1`, with
//! the exponent forced to `+1` for involutions. A letter set is dissociate when
//! no two distinct words evaluate to the same group element. Everything here is
//! truncated at an explicit maximal word length `L`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dualgroup::{DualGroup, GroupElement, GroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DissociateError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("letter {0} is the identity")]
    IdentityLetter(usize),
    #[error("letters {0} and {1} coincide")]
    DuplicateLetter(usize, usize),
    #[error("word length bound must be at least 1")]
    ZeroLevel,
    #[error("letter set is not dissociate: {first} and {second} both evaluate to {element}")]
    NotDissociate {
        first: String,
        second: String,
        element: String,
    },
}

/// A non-identity element of Γ together with its cached involution flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Letter {
    element: GroupElement,
    involution: bool,
}

impl Letter {
    pub fn new(group: &DualGroup, element: GroupElement) -> Result<Self, GroupError> {
        let involution = group.is_involution(&element)?;
        Ok(Letter {
            element,
            involution,
        })
    }

    pub fn element(&self) -> &GroupElement {
        &self.element
    }

    pub fn is_involution(&self) -> bool {
        self.involution
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("exponent must be 1 or -1, got {v}")),
        }
    }
}

/// `∏ θ_{i}^{ε_i}` with strictly increasing letter indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormalWord {
    factors: Vec<(usize, Sign)>,
}

impl FormalWord {
    /// Builds a word, checking index order and the involution exponent rule.
    pub fn new(factors: Vec<(usize, Sign)>, letters: &[Letter]) -> Option<Self> {
        let ordered = factors.windows(2).all(|w| w[0].0 < w[1].0);
        let admissible = factors.iter().all(|&(i, s)| {
            letters
                .get(i)
                .is_some_and(|l| !(l.involution && s == Sign::Minus))
        });
        (ordered && admissible).then_some(FormalWord { factors })
    }

    pub fn factors(&self) -> &[(usize, Sign)] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn evaluate(&self, group: &DualGroup, letters: &[Letter]) -> GroupElement {
        self.factors.iter().fold(group.identity(), |acc, &(i, s)| {
            let el = &letters[i].element;
            match s {
                Sign::Plus => group.combine_unchecked(&acc, el),
                Sign::Minus => group.combine_unchecked(&acc, &group.invert_unchecked(el)),
            }
        })
    }

    /// Renders the word against its letters, e.g. `[3]*[9]^-1`.
    pub fn describe(&self, group: &DualGroup, letters: &[Letter]) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(i, s)| {
                let base = group.display(&letters[i].element);
                match s {
                    Sign::Plus => format!("[{base}]"),
                    Sign::Minus => format!("[{base}]^-1"),
                }
            })
            .collect();
        parts.join("*")
    }
}

pub(crate) fn validate_letters(letters: &[Letter]) -> Result<(), DissociateError> {
    let mut seen: HashMap<&GroupElement, usize> = HashMap::new();
    for (i, l) in letters.iter().enumerate() {
        if l.element.is_identity() {
            return Err(DissociateError::IdentityLetter(i));
        }
        if let Some(&j) = seen.get(&l.element) {
            return Err(DissociateError::DuplicateLetter(j, i));
        }
        seen.insert(&l.element, i);
    }
    Ok(())
}

/// Visits every word of length `≤ max_len` in canonical order: by length, then
/// lexicographically in `(letter_index, exponent)` with `+1` before `-1`.
pub fn for_each_word<F>(group: &DualGroup, letters: &[Letter], max_len: usize, mut visit: F)
where
    F: FnMut(&FormalWord, &GroupElement) -> ControlFlow<()>,
{
    let inverses: Vec<GroupElement> = letters
        .iter()
        .map(|l| group.invert_unchecked(&l.element))
        .collect();
    let mut word = FormalWord::default();
    for len in 0..=max_len.min(letters.len()) {
        let flow = walk(
            group,
            letters,
            &inverses,
            len,
            0,
            &group.identity(),
            &mut word,
            &mut visit,
        );
        if flow.is_break() {
            return;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn walk<F>(
    group: &DualGroup,
    letters: &[Letter],
    inverses: &[GroupElement],
    remaining: usize,
    start: usize,
    acc: &GroupElement,
    word: &mut FormalWord,
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&FormalWord, &GroupElement) -> ControlFlow<()>,
{
    if remaining == 0 {
        return visit(word, acc);
    }
    for i in start..=letters.len() - remaining {
        let signs: &[Sign] = if letters[i].involution {
            &[Sign::Plus]
        } else {
            &[Sign::Plus, Sign::Minus]
        };
        for &s in signs {
            let el = match s {
                Sign::Plus => &letters[i].element,
                Sign::Minus => &inverses[i],
            };
            let next = group.combine_unchecked(acc, el);
            word.factors.push((i, s));
            let flow = walk(
                group,
                letters,
                inverses,
                remaining - 1,
                i + 1,
                &next,
                word,
                visit,
            );
            word.factors.pop();
            flow?;
        }
    }
    ControlFlow::Continue(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DissociateOutcome {
    Verified,
    /// Two distinct words, `first` earlier in canonical order, with equal value.
    Counterexample {
        first: FormalWord,
        second: FormalWord,
        element: GroupElement,
    },
}

/// Exhaustively checks that the evaluation map on words of length `≤ max_len` is injective.
pub fn is_dissociate(
    group: &DualGroup,
    letters: &[Letter],
    max_len: usize,
) -> Result<DissociateOutcome, DissociateError> {
    if max_len == 0 {
        return Err(DissociateError::ZeroLevel);
    }
    for l in letters {
        group.check(&l.element)?;
    }
    validate_letters(letters)?;
    let mut seen: HashMap<GroupElement, FormalWord> = HashMap::new();
    let mut outcome = DissociateOutcome::Verified;
    for_each_word(group, letters, max_len, |w, el| {
        if let Some(prev) = seen.get(el) {
            outcome = DissociateOutcome::Counterexample {
                first: prev.clone(),
                second: w.clone(),
                element: el.clone(),
            };
            return ControlFlow::Break(());
        }
        seen.insert(el.clone(), w.clone());
        ControlFlow::Continue(())
    });
    Ok(outcome)
}

/// Truncated word set Ω_L(Θ), keyed by group element, in canonical order.
#[derive(Debug, Clone)]
pub struct WordSet {
    group: DualGroup,
    max_len: usize,
    entries: Vec<(GroupElement, FormalWord)>,
    index: HashMap<GroupElement, usize>,
}

impl WordSet {
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(GroupElement, FormalWord)] {
        &self.entries
    }

    pub fn get(&self, element: &GroupElement) -> Option<&FormalWord> {
        self.index.get(element).map(|&i| &self.entries[i].1)
    }

    pub fn contains(&self, element: &GroupElement) -> bool {
        self.index.contains_key(element)
    }

    pub fn elements(&self) -> BTreeSet<GroupElement> {
        self.entries.iter().map(|(e, _)| e.clone()).collect()
    }
}

impl Serialize for WordSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            element: String,
            factors: &'a [(usize, Sign)],
        }
        let mut seq = s.serialize_seq(Some(self.entries.len()))?;
        for (el, w) in &self.entries {
            seq.serialize_element(&Record {
                element: self.group.display(el),
                factors: w.factors(),
            })?;
        }
        seq.end()
    }
}

/// Builds Ω_L(Θ), failing if two words collide.
pub fn enumerate_words(
    group: &DualGroup,
    letters: &[Letter],
    max_len: usize,
) -> Result<WordSet, DissociateError> {
    if max_len == 0 {
        return Err(DissociateError::ZeroLevel);
    }
    for l in letters {
        group.check(&l.element)?;
    }
    validate_letters(letters)?;
    let mut entries = Vec::new();
    let mut index = HashMap::new();
    let mut clash = None;
    for_each_word(group, letters, max_len, |w, el| {
        if let Some(&i) = index.get(el) {
            clash = Some((i, w.clone(), el.clone()));
            return ControlFlow::Break(());
        }
        index.insert(el.clone(), entries.len());
        entries.push((el.clone(), w.clone()));
        ControlFlow::Continue(())
    });
    if let Some((i, w, el)) = clash {
        let first: &FormalWord = &entries[i].1;
        return Err(DissociateError::NotDissociate {
            first: first.describe(group, letters),
            second: w.describe(group, letters),
            element: group.display(&el),
        });
    }
    Ok(WordSet {
        group: group.clone(),
        max_len,
        entries,
        index,
    })
}

/// Finds the word of length `≤ max_len` evaluating to `target`, if any.
pub fn decompose(
    group: &DualGroup,
    letters: &[Letter],
    target: &GroupElement,
    max_len: usize,
) -> Option<FormalWord> {
    let mut found = None;
    for_each_word(group, letters, max_len, |w, el| {
        if el == target {
            found = Some(w.clone());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntersectionOutcome {
    /// Ω_L(Θ₁) ∩ Ω_L(Θ₂) = Ω_L(Θ₁ ∩ Θ₂); `common` lists that set in element order.
    Equal { common: Vec<GroupElement> },
    /// An element lying in exactly one side of the equality.
    Violation { element: GroupElement },
}

/// Letters of `a` that also occur (as group elements) in `b`, in `a`'s order.
pub fn shared_letters(a: &[Letter], b: &[Letter]) -> Vec<Letter> {
    let in_b: HashSet<&GroupElement> = b.iter().map(|l| &l.element).collect();
    a.iter()
        .filter(|l| in_b.contains(&l.element))
        .cloned()
        .collect()
}

/// Union of two letter lists, keeping the first occurrence of each element.
pub fn union_letters(a: &[Letter], b: &[Letter]) -> Vec<Letter> {
    let mut seen = HashSet::new();
    a.iter()
        .chain(b)
        .filter(|l| seen.insert(l.element.clone()))
        .cloned()
        .collect()
}

/// Checks, as element sets, that Ω_L(Θ₁) ∩ Ω_L(Θ₂) = Ω_L(Θ₁ ∩ Θ₂).
pub fn word_intersection_check(
    group: &DualGroup,
    first: &[Letter],
    second: &[Letter],
    max_len: usize,
) -> Result<IntersectionOutcome, DissociateError> {
    let union = union_letters(first, second);
    if let DissociateOutcome::Counterexample {
        first: w1,
        second: w2,
        element,
    } = is_dissociate(group, &union, max_len)?
    {
        return Err(DissociateError::NotDissociate {
            first: w1.describe(group, &union),
            second: w2.describe(group, &union),
            element: group.display(&element),
        });
    }
    let a = enumerate_words(group, first, max_len)?.elements();
    let b = enumerate_words(group, second, max_len)?.elements();
    let shared = shared_letters(first, second);
    let c = enumerate_words(group, &shared, max_len)?.elements();
    let lhs: BTreeSet<GroupElement> = a.intersection(&b).cloned().collect();
    if let Some(el) = lhs.symmetric_difference(&c).next() {
        return Ok(IntersectionOutcome::Violation {
            element: el.clone(),
        });
    }
    Ok(IntersectionOutcome::Equal {
        common: c.into_iter().collect(),
    })
}

/// `base^1, …, base^count` in ℤ.
pub fn lacunary_letters(base: u32, count: usize) -> Result<(DualGroup, Vec<Letter>), GroupError> {
    let g = DualGroup::integers();
    let b = num_bigint::BigInt::from(base);
    let mut power = b.clone();
    let mut letters = Vec::with_capacity(count);
    for _ in 0..count {
        letters.push(Letter::new(&g, g.integer(power.clone())?)?);
        power *= &b;
    }
    Ok((g, letters))
}

/// The Rademacher characters `e_1, …, e_count` of ⊕ℤ₂.
pub fn rademacher_letters(count: usize) -> Result<(DualGroup, Vec<Letter>), GroupError> {
    let g = DualGroup::sum_order_two();
    let letters = (1..=count as u64)
        .map(|i| Letter::new(&g, g.basis(0, i)?))
        .collect::<Result<_, _>>()?;
    Ok((g, letters))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Upper bound `Σ_{k≤L} C(n,k)·2^k` on |Ω_L(Θ)| for `n` letters.
pub fn word_count_bound(n: usize, max_len: usize) -> u128 {
    (0..=max_len.min(n)).map(|k| binomial(n, k) << k).sum()
}

/// Number of formal words of length `≤ L` over `involutions` involutive and
/// `others` non-involutive letters; equals |Ω_L(Θ)| when Θ is dissociate.
pub fn word_count(involutions: usize, others: usize, max_len: usize) -> u128 {
    let mut total = 0;
    for k in 0..=max_len {
        for j in 0..=k.min(involutions) {
            total += binomial(involutions, j) * (binomial(others, k - j) << (k - j));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zletters(vals: &[i64]) -> (DualGroup, Vec<Letter>) {
        let g = DualGroup::integers();
        let ls = vals
            .iter()
            .map(|&v| Letter::new(&g, g.integer(v).unwrap()).unwrap())
            .collect();
        (g, ls)
    }

    fn ints(ws: &WordSet) -> BTreeSet<i64> {
        ws.entries()
            .iter()
            .map(|(e, _)| e.as_i64().unwrap())
            .collect()
    }

    #[test]
    fn lacunary_three_is_dissociate() {
        let (g, ls) = zletters(&[3, 9, 27]);
        assert_eq!(
            is_dissociate(&g, &ls, 3).unwrap(),
            DissociateOutcome::Verified
        );
    }

    #[test]
    fn one_two_three_counterexample() {
        let (g, ls) = zletters(&[1, 2, 3]);
        match is_dissociate(&g, &ls, 2).unwrap() {
            DissociateOutcome::Counterexample {
                first,
                second,
                element,
            } => {
                assert_eq!(element.as_i64(), Some(3));
                assert_eq!(first.factors(), &[(2, Sign::Plus)]);
                assert_eq!(second.factors(), &[(0, Sign::Plus), (1, Sign::Plus)]);
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn rademacher_basis_is_dissociate() {
        let g = DualGroup::sum_order_two();
        let ls: Vec<Letter> = (1..=3)
            .map(|i| Letter::new(&g, g.basis(0, i).unwrap()).unwrap())
            .collect();
        assert_eq!(
            is_dissociate(&g, &ls, 3).unwrap(),
            DissociateOutcome::Verified
        );
        let ws = enumerate_words(&g, &ls, 3).unwrap();
        assert_eq!(ws.len(), 8);
    }

    #[test]
    fn bad_inputs() {
        let (g, ls) = zletters(&[3, 3]);
        assert_eq!(
            is_dissociate(&g, &ls, 2),
            Err(DissociateError::DuplicateLetter(0, 1))
        );
        let (g, ls) = zletters(&[3]);
        assert_eq!(is_dissociate(&g, &ls, 0), Err(DissociateError::ZeroLevel));
        assert!(Letter::new(&g, g.identity()).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let (g, ls) = zletters(&[3]);
        assert_eq!(
            ints(&enumerate_words(&g, &ls, 1).unwrap()),
            [0, 3, -3].into()
        );
        let s = DualGroup::sum_order_two();
        let e1 = vec![Letter::new(&s, s.basis(0, 1).unwrap()).unwrap()];
        let ws = enumerate_words(&s, &e1, 1).unwrap();
        assert_eq!(ws.len(), 2);
        assert!(ws.contains(&s.identity()));
        let (g, ls) = zletters(&[3, 9]);
        assert_eq!(
            ints(&enumerate_words(&g, &ls, 2).unwrap()),
            [0, 3, -3, 9, -9, 6, -6, 12, -12].into()
        );
    }

    #[test]
    fn canonical_order() {
        let (g, ls) = zletters(&[3, 9]);
        let ws = enumerate_words(&g, &ls, 2).unwrap();
        let order: Vec<i64> = ws
            .entries()
            .iter()
            .map(|(e, _)| e.as_i64().unwrap())
            .collect();
        assert_eq!(order, vec![0, 3, -3, 9, -9, 12, -6, 6, -12]);
    }

    #[test]
    fn enumerate_rejects_collisions() {
        let (g, ls) = zletters(&[1, 2, 3]);
        assert!(matches!(
            enumerate_words(&g, &ls, 2),
            Err(DissociateError::NotDissociate { .. })
        ));
    }

    #[test]
    fn intersection_examples() {
        let (g, a) = zletters(&[3, 9]);
        let (_, b) = zletters(&[9, 27]);
        match word_intersection_check(&g, &a, &b, 2).unwrap() {
            IntersectionOutcome::Equal { common } => {
                let got: BTreeSet<i64> = common.iter().map(|e| e.as_i64().unwrap()).collect();
                assert_eq!(got, [0, 9, -9].into());
            }
            v => panic!("{v:?}"),
        }
        let (_, a) = zletters(&[3]);
        let (_, b) = zletters(&[9]);
        assert_eq!(
            word_intersection_check(&g, &a, &b, 3).unwrap(),
            IntersectionOutcome::Equal {
                common: vec![g.identity()]
            }
        );
        let (_, a) = zletters(&[3, 9]);
        match word_intersection_check(&g, &a, &a, 2).unwrap() {
            IntersectionOutcome::Equal { common } => assert_eq!(common.len(), 9),
            v => panic!("{v:?}"),
        }
        let (_, a) = zletters(&[1, 2]);
        let (_, b) = zletters(&[3]);
        assert!(word_intersection_check(&g, &a, &b, 2).is_err());
    }

    #[test]
    fn decompose_finds_mixed_signs() {
        let (g, ls) = zletters(&[3, 9]);
        let w = decompose(&g, &ls, &g.integer(6).unwrap(), 2).unwrap();
        assert_eq!(w.factors(), &[(0, Sign::Minus), (1, Sign::Plus)]);
        assert!(decompose(&g, &ls, &g.integer(7).unwrap(), 2).is_none());
    }

    #[test]
    fn counts() {
        assert_eq!(word_count_bound(3, 3), 27);
        assert_eq!(word_count_bound(40, 4), 1 + 80 + 3120 + 79040 + 1462240);
        assert_eq!(word_count(0, 3, 3), 27);
        assert_eq!(word_count(3, 0, 3), 8);
        assert_eq!(word_count(1, 1, 2), 6);
    }

    #[test]
    fn word_json_shape() {
        let (g, ls) = zletters(&[3]);
        let ws = enumerate_words(&g, &ls, 1).unwrap();
        let json = serde_json::to_string(&ws).unwrap();
        assert_eq!(
            json,
            r#"[{"element":"0","factors":[]},{"element":"3","factors":[[0,1]]},{"element":"-3","factors":[[0,-1]]}]"#
        );
    }
}
