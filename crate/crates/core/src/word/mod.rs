//! Reduced words, cyclic words and boundary rays of a free group `F_N` in a
//! fixed basis.
//!
//! Words use the ASCII syntax `a`..`z` for generators and `A`..`Z` for their
//! inverses; the identity is spelled `1`.

mod cyclic;
mod ray;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use cyclic::CyclicWord;
pub use ray::{leaf_window, LeafWindow, Ray, RayEq, RayError, WindowOutcome, WindowParams};

/// Largest rank expressible in the single-letter ASCII syntax.
pub const MAX_RANK: usize = 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid letter {0:?}")]
    InvalidLetter(char),
    #[error("word `{word}` is not freely reduced at position {position}")]
    NotReduced { word: String, position: usize },
    #[error("letter `{letter}` lies outside the basis of rank {rank}")]
    BasisMismatch { letter: char, rank: usize },
    #[error("rank must be between 2 and {MAX_RANK}, got {0}")]
    BadRank(usize),
    #[error("the identity has no cyclic normal form")]
    Identity,
    #[error("cyclic word `{0}` is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("empty word literal (write `1` for the identity)")]
    Empty,
}

/// A generator or inverse generator.
///
/// Encoded as `2 * index + sign_bit`, so the derived order is generator index
/// ascending with the positive letter before its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < MAX_RANK, "generator index {generator} out of range");
        Letter((generator as u8) << 1 | inverse as u8)
    }

    pub fn from_code(code: usize) -> Self {
        assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }

    pub fn from_char(c: char) -> Result<Self, WordError> {
        match c {
            'a'..='z' => Ok(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Ok(Letter::new(c as usize - 'A' as usize, true)),
            _ => Err(WordError::InvalidLetter(c)),
        }
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A free basis `a, b, c, ...` of rank `N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    rank: usize,
}

impl Basis {
    pub fn new(rank: usize) -> Result<Self, WordError> {
        if !(2..=MAX_RANK).contains(&rank) {
            return Err(WordError::BadRank(rank));
        }
        Ok(Basis { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        (0..self.rank).map(|i| Letter::new(i, false).to_char())
    }

    /// All `2N` letters in the canonical letter order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..2 * self.rank).map(Letter::from_code)
    }

    pub fn contains(&self, letter: Letter) -> bool {
        letter.generator() < self.rank
    }

    pub fn check(&self, word: &ReducedWord) -> Result<(), WordError> {
        match word.letters().iter().find(|l| !self.contains(**l)) {
            Some(l) => Err(WordError::BasisMismatch { letter: l.to_char(), rank: self.rank }),
            None => Ok(()),
        }
    }

    /// Every reduced word of length at most `max_len`, in shortlex order.
    pub fn ball(&self, max_len: usize) -> Vec<ReducedWord> {
        let mut out = vec![ReducedWord::identity()];
        let mut frontier = vec![ReducedWord::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in self.letters() {
                    if w.last() == Some(l.inverse()) {
                        continue;
                    }
                    let mut letters = w.0.clone();
                    letters.push(l);
                    next.push(ReducedWord(letters));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// Incremental free reduction of a stream of letters.
#[derive(Debug, Default, Clone)]
pub struct Reducer {
    stack: Vec<Letter>,
}

impl Reducer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Reducer { stack: Vec::with_capacity(n) }
    }

    #[inline]
    pub fn push(&mut self, l: Letter) {
        if self.stack.last() == Some(&l.inverse()) {
            self.stack.pop();
        } else {
            self.stack.push(l);
        }
    }

    pub fn extend<I: IntoIterator<Item = Letter>>(&mut self, letters: I) {
        for l in letters {
            self.push(l);
        }
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn finish(self) -> ReducedWord {
        ReducedWord(self.stack)
    }
}

/// A freely reduced word; the empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        ReducedWord(vec![l])
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut r = Reducer::new();
        r.extend(letters);
        r.finish()
    }

    /// Wraps letters that are already known to be reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self, WordError> {
        if let Some(i) = first_cancellation(&letters) {
            return Err(WordError::NotReduced {
                word: letters.iter().map(|l| l.to_char()).collect(),
                position: i,
            });
        }
        Ok(ReducedWord(letters))
    }

    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>) -> Self {
        debug_assert!(first_cancellation(&letters).is_none());
        ReducedWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Group product: the free reduction of the concatenation.
    pub fn multiply(&self, other: &ReducedWord) -> ReducedWord {
        let (a, b) = (&self.0, &other.0);
        let mut c = 0;
        while c < a.len() && c < b.len() && a[a.len() - 1 - c] == b[c].inverse() {
            c += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * c);
        letters.extend_from_slice(&a[..a.len() - c]);
        letters.extend_from_slice(&b[c..]);
        ReducedWord(letters)
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn power(&self, k: i64) -> ReducedWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = ReducedWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    pub fn prefix(&self, n: usize) -> ReducedWord {
        ReducedWord(self.0[..n.min(self.len())].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> ReducedWord {
        ReducedWord(self.0[start.min(self.len())..].to_vec())
    }

    pub fn common_prefix_len(&self, other: &ReducedWord) -> usize {
        common_prefix_len(&self.0, &other.0)
    }

    pub fn starts_with(&self, other: &ReducedWord) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `u = p · core · p⁻¹` with `core` cyclically reduced.
    pub fn cyclic_core(&self) -> (ReducedWord, ReducedWord) {
        let n = self.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.0[i] == self.0[n - 1 - i].inverse() {
            i += 1;
        }
        (ReducedWord(self.0[..i].to_vec()), ReducedWord(self.0[i..n - i].to_vec()))
    }

    /// Canonical cyclic word of the conjugacy class of `self`, together with a
    /// conjugator `g` such that `self = g · c · g⁻¹`.
    pub fn cyclic_normalize(&self) -> Result<(CyclicWord, ReducedWord), WordError> {
        if self.is_identity() {
            return Err(WordError::Identity);
        }
        let (outer, core) = self.cyclic_core();
        let shift = cyclic::least_rotation(core.letters());
        // core = x·y with canonical rotation y·x = x⁻¹·core·x
        let x = ReducedWord(core.0[..shift].to_vec());
        let mut rotated = core.0[shift..].to_vec();
        rotated.extend_from_slice(&core.0[..shift]);
        Ok((CyclicWord::from_canonical(rotated), outer.multiply(&x)))
    }

    /// Length-`k` windows of the word, or the whole word when shorter.
    pub fn factors(&self, k: usize) -> std::collections::BTreeSet<ReducedWord> {
        let mut set = HashSet::new();
        collect_windows(&self.0, k, false, &mut set);
        close_under_subwords(set.into_iter().map(|s| s.to_vec()), k)
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex: shorter words first, then lexicographic in the letter order.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl serde::Serialize for ReducedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for ReducedWord {
    type Err = WordError;

    /// Parses a reduced word; unreduced input is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "1" {
            return Ok(ReducedWord::identity());
        }
        if s.is_empty() {
            return Err(WordError::Empty);
        }
        let letters = parse_letters(s)?;
        ReducedWord::from_reduced(letters)
    }
}

pub fn parse_letters(s: &str) -> Result<Vec<Letter>, WordError> {
    s.chars().map(Letter::from_char).collect()
}

fn first_cancellation(letters: &[Letter]) -> Option<usize> {
    letters.windows(2).position(|w| w[0] == w[1].inverse())
}

pub(crate) fn common_prefix_len(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Collects the distinct length-`k` windows of `letters` (read cyclically when
/// `cyclic`); a linear word shorter than `k` contributes itself.
pub(crate) fn collect_windows<'a>(
    letters: &'a [Letter],
    k: usize,
    cyclic: bool,
    out: &mut HashSet<Vec<Letter>>,
) {
    if letters.is_empty() || k == 0 {
        return;
    }
    if cyclic {
        let n = letters.len();
        let reps = k.div_ceil(n) + 1;
        let mut buf = Vec::with_capacity(n * reps);
        for _ in 0..reps {
            buf.extend_from_slice(letters);
        }
        let mut seen: HashSet<&[Letter]> = HashSet::new();
        for i in 0..n {
            seen.insert(&buf[i..i + k]);
        }
        out.extend(seen.into_iter().map(|s| s.to_vec()));
    } else if letters.len() <= k {
        out.insert(letters.to_vec());
    } else {
        let seen: HashSet<&'a [Letter]> = letters.windows(k).collect();
        out.extend(seen.into_iter().map(|s| s.to_vec()));
    }
}

/// All nonempty factors of the given words, up to length `k`.
pub(crate) fn close_under_subwords<I>(words: I, k: usize) -> std::collections::BTreeSet<ReducedWord>
where
    I: IntoIterator<Item = Vec<Letter>>,
{
    let mut set = std::collections::BTreeSet::new();
    for w in words {
        for i in 0..w.len() {
            for j in i + 1..=w.len().min(i + k) {
                set.insert(ReducedWord(w[i..j].to_vec()));
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    /// Letter-by-letter push-and-cancel, written independently of `multiply`.
    fn naive_reduce(letters: &[Letter]) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        for &l in letters {
            match out.last() {
                Some(&t) if t == l.inverse() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        out
    }

    #[test]
    fn letter_order_and_syntax() {
        let a = Letter::from_char('a').unwrap();
        let big_a = Letter::from_char('A').unwrap();
        let b = Letter::from_char('b').unwrap();
        assert!(a < big_a && big_a < b);
        assert_eq!(a.inverse(), big_a);
        assert_eq!(big_a.to_char(), 'A');
        assert!(Letter::from_char('1').is_err());
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(w("ab").multiply(&w("Bc")), w("ac"));
        assert_eq!(w("a").multiply(&w("A")), ReducedWord::identity());
        assert_eq!(w("abc").multiply(&w("CBA")).to_string(), "1");
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w("aBc").inverse(), w("CbA"));
        assert_eq!(ReducedWord::identity().inverse(), ReducedWord::identity());
    }

    #[test]
    fn parse_rejects_unreduced() {
        assert!(matches!("abAab".parse::<ReducedWord>(), Err(WordError::NotReduced { .. })));
        assert!(matches!("".parse::<ReducedWord>(), Err(WordError::Empty)));
        assert_eq!(w("1"), ReducedWord::identity());
    }

    #[test]
    fn cyclic_normalize_examples() {
        let (c, g) = w("Bab").cyclic_normalize().unwrap();
        assert_eq!(c.to_string(), "[a]");
        assert_eq!(g, w("B"));
        let (c, _) = w("abb").cyclic_normalize().unwrap();
        assert_eq!(c.to_string(), "[abb]");
        assert_eq!(ReducedWord::identity().cyclic_normalize(), Err(WordError::Identity));
    }

    #[test]
    fn cyclic_normalize_reconstructs() {
        let basis = Basis::new(3).unwrap();
        for u in basis.ball(4).into_iter().skip(1) {
            let (c, g) = u.cyclic_normalize().unwrap();
            let back = g.multiply(&c.linear()).multiply(&g.inverse());
            assert_eq!(back, u, "{u}");
        }
    }

    #[test]
    fn ball_sizes() {
        let basis = Basis::new(3).unwrap();
        // 1 + 6 + 30 + 150
        assert_eq!(basis.ball(3).len(), 187);
        assert!(basis.ball(3).windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn bad_rank() {
        assert_eq!(Basis::new(1), Err(WordError::BadRank(1)));
        assert!(Basis::new(27).is_err());
        let basis = Basis::new(2).unwrap();
        assert!(basis.check(&w("abc")).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn letters(rank: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
            prop::collection::vec((0..2 * rank).prop_map(Letter::from_code), 0..=max)
        }

        proptest! {
            #[test]
            fn multiply_matches_naive(u in letters(3, 12), v in letters(3, 12)) {
                let u = ReducedWord::reduce(u);
                let v = ReducedWord::reduce(v);
                let mut cat = u.letters().to_vec();
                cat.extend_from_slice(v.letters());
                let prod = u.multiply(&v);
                prop_assert_eq!(prod.letters(), &naive_reduce(&cat)[..]);
            }

            #[test]
            fn group_laws(u in letters(3, 10), v in letters(3, 10), x in letters(3, 10)) {
                let (u, v, x) = (ReducedWord::reduce(u), ReducedWord::reduce(v), ReducedWord::reduce(x));
                prop_assert_eq!(u.multiply(&v).multiply(&x), u.multiply(&v.multiply(&x)));
                prop_assert_eq!(u.multiply(&v).inverse(), v.inverse().multiply(&u.inverse()));
                prop_assert!(u.multiply(&u.inverse()).is_identity());
                prop_assert_eq!(u.inverse().inverse(), u);
            }

            #[test]
            fn conjugates_share_cyclic_word(u in letters(3, 10), x in letters(3, 6)) {
                let u = ReducedWord::reduce(u);
                prop_assume!(!u.is_identity());
                let x = ReducedWord::reduce(x);
                let conj = x.multiply(&u).multiply(&x.inverse());
                prop_assert_eq!(u.cyclic_normalize().unwrap().0, conj.cyclic_normalize().unwrap().0);
            }
        }
    }
}
