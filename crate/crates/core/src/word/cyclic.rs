use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use super::{close_under_subwords, collect_windows, parse_letters, Letter, ReducedWord, WordError};

/// A conjugacy class of `F_N`, stored as the lexicographically least rotation
/// of a cyclically reduced word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    pub(super) fn from_canonical(letters: Vec<Letter>) -> Self {
        CyclicWord(letters)
    }

    /// Canonical cyclic word of the class of `w`.
    pub fn of(w: &ReducedWord) -> Result<Self, WordError> {
        w.cyclic_normalize().map(|(c, _)| c)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The canonical rotation read as an ordinary word.
    pub fn linear(&self) -> ReducedWord {
        ReducedWord::from_reduced_unchecked(self.0.clone())
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::of(&self.linear().inverse()).expect("nontrivial")
    }

    /// All factors of length at most `k` of the biinfinite periodic word.
    pub fn factors(&self, k: usize) -> BTreeSet<ReducedWord> {
        let mut set = HashSet::new();
        collect_windows(&self.0, k, true, &mut set);
        close_under_subwords(set, k)
    }

    /// True when the class is a proper power `[u^j]`, `j ≥ 2`.
    pub fn is_proper_power(&self) -> bool {
        let n = self.0.len();
        (1..n).any(|d| n.is_multiple_of(d) && (d..n).all(|i| self.0[i] == self.0[i - d]))
    }

    /// Every conjugacy class with a cyclically reduced representative of
    /// length `1..=max_len`, in sorted order.
    pub fn enumerate(rank: usize, max_len: usize) -> Vec<CyclicWord> {
        let basis = super::Basis::new(rank).expect("rank checked by caller");
        let mut out: BTreeSet<CyclicWord> = BTreeSet::new();
        for w in basis.ball(max_len).into_iter().skip(1) {
            if w.is_cyclically_reduced() {
                out.insert(CyclicWord::of(&w).unwrap());
            }
        }
        out.into_iter().collect()
    }
}

/// Booth's algorithm: start index of the lexicographically least rotation.
pub(super) fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut failure = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j % n];
        let mut i = failure[j - k - 1];
        while i != usize::MAX && sj != s[(k + i + 1) % n] {
            if sj < s[(k + i + 1) % n] {
                k = j - i - 1;
            }
            i = failure[i];
        }
        if i == usize::MAX && sj != s[(k + i.wrapping_add(1)) % n] {
            if sj < s[(k + i.wrapping_add(1)) % n] {
                k = j;
            }
            failure[j - k] = usize::MAX;
        } else {
            failure[j - k] = i.wrapping_add(1);
        }
    }
    k
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for CyclicWord {
    type Err = WordError;

    /// Accepts `[w]` or a bare word; the word must be cyclically reduced.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let inner = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')).unwrap_or(s);
        if inner.is_empty() || inner == "1" {
            return Err(WordError::Identity);
        }
        let w = ReducedWord::from_reduced(parse_letters(inner)?)?;
        if !w.is_cyclically_reduced() {
            return Err(WordError::NotCyclicallyReduced(inner.to_string()));
        }
        CyclicWord::of(&w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cw(s: &str) -> CyclicWord {
        s.parse().unwrap()
    }

    fn set(words: &[&str]) -> BTreeSet<ReducedWord> {
        words.iter().map(|s| s.parse().unwrap()).collect()
    }

    fn brute_least_rotation(s: &[Letter]) -> Vec<Letter> {
        (0..s.len())
            .map(|i| {
                let mut r = s[i..].to_vec();
                r.extend_from_slice(&s[..i]);
                r
            })
            .min()
            .unwrap_or_default()
    }

    #[test]
    fn factor_examples() {
        assert_eq!(cw("ab").factors(3), set(&["a", "b", "ab", "ba", "aba", "bab"]));
        assert_eq!(cw("a").factors(2), set(&["a", "aa"]));
        assert_eq!(cw("abAcc").factors(1), set(&["a", "b", "A", "c"]));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(cw("bba").to_string(), "[abb]");
        assert_eq!(cw("[Ba]").to_string(), "[aB]");
        assert!("[aBA]".parse::<CyclicWord>().is_err());
        assert!("[]".parse::<CyclicWord>().is_err());
    }

    #[test]
    fn proper_powers() {
        assert!(cw("abab").is_proper_power());
        assert!(cw("aa").is_proper_power());
        assert!(!cw("aab").is_proper_power());
        assert!(!cw("a").is_proper_power());
    }

    #[test]
    fn enumerate_counts_classes() {
        // rank 2, length 1: a, A, b, B
        assert_eq!(CyclicWord::enumerate(2, 1).len(), 4);
        // length 2 adds aa, ab, aB, AA, Ab, AB, bb, BB
        assert_eq!(CyclicWord::enumerate(2, 2).len(), 12);
    }

    proptest! {
        #[test]
        fn booth_matches_brute_force(v in prop::collection::vec(0usize..6, 1..24)) {
            let letters: Vec<Letter> = v.into_iter().map(Letter::from_code).collect();
            let k = least_rotation(&letters);
            let mut rot = letters[k..].to_vec();
            rot.extend_from_slice(&letters[..k]);
            prop_assert_eq!(rot, brute_least_rotation(&letters));
        }

        #[test]
        fn factors_closed_and_flip_symmetric(v in prop::collection::vec(0usize..6, 1..10), k in 1usize..6) {
            let w = ReducedWord::reduce(v.into_iter().map(Letter::from_code));
            prop_assume!(!w.is_identity());
            let c = CyclicWord::of(&w).unwrap();
            let f = c.factors(k);
            for x in &f {
                for sub in x.factors(x.len()) {
                    prop_assert!(f.contains(&sub));
                }
            }
            let inv: BTreeSet<ReducedWord> = f.iter().map(|x| x.inverse()).collect();
            prop_assert_eq!(c.inverse().factors(k), inv);
        }
    }
}
