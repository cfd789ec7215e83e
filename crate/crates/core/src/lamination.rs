//! Finite-depth factor languages approximating algebraic laminations, and
//! leaf membership tests against them.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automorphism::{AutError, Automorphism};
use crate::word::{
    close_under_subwords, collect_windows, leaf_window, CyclicWord, Letter, Ray, ReducedWord, WindowOutcome,
    WindowParams, MAX_RANK,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaminationError {
    #[error("test depth {k} exceeds language depth {depth}")]
    DepthTooLarge { k: usize, depth: usize },
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("bad language file at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Aut(#[from] AutError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Rational,
    Orbit,
    Bfh,
    Ray,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Rational => "rational",
            Provenance::Orbit => "orbit",
            Provenance::Bfh => "bfh",
            Provenance::Ray => "ray",
        })
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Provenance::Rational),
            "orbit" => Ok(Provenance::Orbit),
            "bfh" => Ok(Provenance::Bfh),
            "ray" => Ok(Provenance::Ray),
            other => Err(format!("unknown provenance {other:?}")),
        }
    }
}

/// Iteration history of a language built stage by stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StageInfo {
    /// Last stage that added a word.
    pub last_growth: usize,
    /// Number of stages computed after stage 0.
    pub computed: usize,
    pub budget_exceeded: bool,
}

const WIDTH: usize = 2 * MAX_RANK;
const NONE: u32 = u32::MAX;

/// Prefix tree over a subword-closed set; every node is a member.
#[derive(Clone, Default)]
struct Trie {
    children: Vec<u32>,
}

impl Trie {
    fn build<'a>(words: impl Iterator<Item = &'a ReducedWord>) -> Self {
        let mut t = Trie { children: vec![NONE; WIDTH] };
        for w in words {
            let mut node = 0usize;
            for l in w.letters() {
                let slot = node * WIDTH + l.code();
                if t.children[slot] == NONE {
                    let id = t.children.len() / WIDTH;
                    t.children.extend(std::iter::repeat_n(NONE, WIDTH));
                    t.children[slot] = id as u32;
                }
                node = t.children[slot] as usize;
            }
        }
        t
    }

    fn contains(&self, letters: &[Letter]) -> bool {
        let mut node = 0usize;
        for l in letters {
            match self.children[node * WIDTH + l.code()] {
                NONE => return false,
                next => node = next as usize,
            }
        }
        true
    }
}

/// A subword- and inversion-closed set of reduced words of length `≤ depth`.
#[derive(Clone)]
pub struct FactorLanguage {
    depth: usize,
    words: BTreeSet<ReducedWord>,
    stabilized: bool,
    provenance: Provenance,
    stages: Option<StageInfo>,
    index: Trie,
}

impl fmt::Debug for FactorLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FactorLanguage")
            .field("depth", &self.depth)
            .field("provenance", &self.provenance)
            .field("stabilized", &self.stabilized)
            .field("words", &self.words)
            .finish()
    }
}

impl PartialEq for FactorLanguage {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth
            && self.stabilized == other.stabilized
            && self.provenance == other.provenance
            && self.words == other.words
    }
}

impl FactorLanguage {
    /// Closes `words` under subwords (up to `depth`) and inversion.
    pub fn from_words(
        depth: usize,
        words: impl IntoIterator<Item = ReducedWord>,
        stabilized: bool,
        provenance: Provenance,
    ) -> Self {
        let mut acc = LanguageAccumulator::new(depth);
        for w in words {
            acc.add_linear(w.letters());
        }
        acc.finish(stabilized, provenance, None)
    }

    fn from_closed(
        depth: usize,
        words: BTreeSet<ReducedWord>,
        stabilized: bool,
        provenance: Provenance,
        stages: Option<StageInfo>,
    ) -> Self {
        let index = Trie::build(words.iter());
        FactorLanguage { depth, words, stabilized, provenance, stages, index }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> &BTreeSet<ReducedWord> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_stabilized(&self) -> bool {
        self.stabilized
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn stages(&self) -> Option<StageInfo> {
        self.stages
    }

    /// Membership in `O(|w|)`; words longer than the depth are never members.
    pub fn contains(&self, letters: &[Letter]) -> bool {
        !letters.is_empty() && letters.len() <= self.depth && self.index.contains(letters)
    }

    /// Words of length `≤ k`.
    pub fn truncate(&self, k: usize) -> FactorLanguage {
        let k = k.min(self.depth);
        let words = self.words.iter().filter(|w| w.len() <= k).cloned().collect();
        FactorLanguage::from_closed(k, words, self.stabilized, self.provenance, self.stages)
    }

    /// Set union at the smaller depth; stabilized only if both are.
    pub fn union(&self, other: &FactorLanguage) -> FactorLanguage {
        let k = self.depth.min(other.depth);
        let words = self.truncate(k).words.union(&other.truncate(k).words).cloned().collect();
        FactorLanguage::from_closed(k, words, self.stabilized && other.stabilized, self.provenance, None)
    }

    /// Words of length `k` (the top layer, from which the rest is generated).
    pub fn top_layer(&self) -> impl Iterator<Item = &ReducedWord> {
        self.words.iter().filter(move |w| w.len() == self.depth)
    }

    /// Checks subword and inversion closure.
    pub fn audit(&self) -> Result<(), String> {
        for w in &self.words {
            if w.is_identity() || w.len() > self.depth {
                return Err(format!("word {w} has bad length"));
            }
            if !self.words.contains(&w.inverse()) {
                return Err(format!("inverse of {w} missing"));
            }
            let l = w.letters();
            for sub in [&l[1..], &l[..l.len() - 1]] {
                if !sub.is_empty() && !self.contains(sub) {
                    return Err(format!("subword of {w} missing"));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "lamlang depth={} stabilized={} provenance={}\n",
            self.depth, self.stabilized as u8, self.provenance
        );
        for w in &self.words {
            s.push_str(&w.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<FactorLanguage, LaminationError> {
        let err = |line: usize, reason: String| LaminationError::Parse { line, reason };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("lamlang") {
            return Err(err(1, "missing lamlang header".into()));
        }
        let (mut depth, mut stabilized, mut provenance) = (None, None, None);
        for f in fields {
            match f.split_once('=') {
                Some(("depth", v)) => depth = v.parse::<usize>().ok(),
                Some(("stabilized", "0")) => stabilized = Some(false),
                Some(("stabilized", "1")) => stabilized = Some(true),
                Some(("provenance", v)) => provenance = Some(v.parse().map_err(|e| err(1, e))?),
                _ => return Err(err(1, format!("bad header field {f:?}"))),
            }
        }
        let (Some(depth), Some(stabilized), Some(provenance)) = (depth, stabilized, provenance) else {
            return Err(err(1, "incomplete header".into()));
        };
        let mut words = BTreeSet::new();
        for (i, line) in lines {
            let w: ReducedWord = line.trim().parse().map_err(|e| err(i + 1, format!("{e}")))?;
            words.insert(w);
        }
        let lang = FactorLanguage::from_closed(depth, words, stabilized, provenance, None);
        lang.audit().map_err(|e| err(0, e))?;
        Ok(lang)
    }
}

/// Incrementally built subword- and inversion-closed set.
pub(crate) struct LanguageAccumulator {
    depth: usize,
    words: BTreeSet<ReducedWord>,
}

impl LanguageAccumulator {
    pub(crate) fn new(depth: usize) -> Self {
        LanguageAccumulator { depth, words: BTreeSet::new() }
    }

    fn absorb(&mut self, windows: HashSet<Vec<Letter>>) -> bool {
        let fresh: Vec<Vec<Letter>> = windows
            .into_iter()
            .filter(|w| !self.words.contains(&ReducedWord::from_reduced_unchecked(w.clone())))
            .collect();
        if fresh.is_empty() {
            return false;
        }
        let before = self.words.len();
        for w in close_under_subwords(fresh, self.depth) {
            let inv = w.inverse();
            self.words.insert(w);
            self.words.insert(inv);
        }
        self.words.len() > before
    }

    /// Adds the factors of a finite word; returns whether the set grew.
    pub(crate) fn add_linear(&mut self, letters: &[Letter]) -> bool {
        let mut windows = HashSet::new();
        collect_windows(letters, self.depth, false, &mut windows);
        self.absorb(windows)
    }

    /// Adds the factors of a biinfinite periodic word.
    pub(crate) fn add_cyclic(&mut self, letters: &[Letter]) -> bool {
        let mut windows = HashSet::new();
        collect_windows(letters, self.depth, true, &mut windows);
        self.absorb(windows)
    }

    pub(crate) fn finish(self, stabilized: bool, provenance: Provenance, stages: Option<StageInfo>) -> FactorLanguage {
        FactorLanguage::from_closed(self.depth, self.words, stabilized, provenance, stages)
    }
}

/// Factors of the periodic leaf `(w^∞, w^{-∞})`; exact at every depth.
pub fn rational_language(w: &CyclicWord, k: usize) -> FactorLanguage {
    let mut acc = LanguageAccumulator::new(k);
    acc.add_cyclic(w.letters());
    acc.finish(true, Provenance::Rational, None)
}

/// Factors of `φⁿ[h]` over `0 ≤ n ≤ n_max`, with the same stall rule as the
/// edge-iteration language. A tripped length budget gives a partial,
/// unstabilized result.
pub fn orbit_language(phi: &Automorphism, h: &CyclicWord, k: usize, n_max: usize, stall: usize) -> FactorLanguage {
    let mut acc = LanguageAccumulator::new(k);
    let mut cur = h.linear();
    acc.add_cyclic(cur.letters());
    let mut info = StageInfo::default();
    let mut unchanged = 0;
    let mut stabilized = n_max == 0 && stall == 0;
    for n in 1..=n_max {
        let Ok(img) = phi.apply(&cur) else {
            info.budget_exceeded = true;
            break;
        };
        cur = img.cyclic_core().1;
        info.computed = n;
        if acc.add_cyclic(cur.letters()) {
            info.last_growth = n;
            unchanged = 0;
        } else {
            unchanged += 1;
            if unchanged >= stall {
                stabilized = true;
                break;
            }
        }
    }
    acc.finish(stabilized, Provenance::Orbit, Some(info))
}

/// Accumulation-point version of [`orbit_language`]: the union of the factor
/// sets of the last `window` iterates. Factors that only occur in early
/// iterates drop out. Stabilized once this union is unchanged for `window`
/// consecutive stages.
pub fn orbit_tail_language(
    phi: &Automorphism,
    h: &CyclicWord,
    k: usize,
    n_max: usize,
    window: usize,
) -> FactorLanguage {
    let window = window.max(1);
    let stage = |letters: &[Letter]| {
        let mut acc = LanguageAccumulator::new(k);
        acc.add_cyclic(letters);
        acc.words
    };
    let mut cur = h.linear();
    let mut recent: std::collections::VecDeque<BTreeSet<ReducedWord>> = [stage(cur.letters())].into();
    let union = |recent: &std::collections::VecDeque<BTreeSet<ReducedWord>>| {
        recent.iter().flatten().cloned().collect::<BTreeSet<_>>()
    };
    let mut current = union(&recent);
    let mut info = StageInfo::default();
    let mut unchanged = 0;
    let mut stabilized = false;
    for n in 1..=n_max {
        let Ok(img) = phi.apply(&cur) else {
            info.budget_exceeded = true;
            break;
        };
        cur = img.cyclic_core().1;
        info.computed = n;
        recent.push_back(stage(cur.letters()));
        if recent.len() > window {
            recent.pop_front();
        }
        let next = union(&recent);
        if next == current {
            unchanged += 1;
        } else {
            info.last_growth = n;
            unchanged = 0;
            current = next;
        }
        if recent.len() == window && unchanged >= window {
            stabilized = true;
            break;
        }
    }
    FactorLanguage::from_closed(k, current, stabilized, Provenance::Orbit, Some(info))
}

/// How an orbit of cyclic words generates a language.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitMode {
    /// Every factor of every iterate, as in [`orbit_language`].
    Union,
    /// Factors that persist into late iterates, as in [`orbit_tail_language`].
    #[default]
    Tail,
}

/// Union of orbit languages over the classes used.
#[derive(Debug, Clone)]
pub struct MitraLanguage {
    pub language: FactorLanguage,
    /// One class per `{[h], [h⁻¹]}`, in sorted order.
    pub classes: Vec<CyclicWord>,
}

/// Union of orbit languages over all nontrivial classes of length `≤ r`, one
/// per inverse pair. Stabilized only if every member is.
pub fn mitra_language(
    phi: &Automorphism,
    r: usize,
    k: usize,
    n_max: usize,
    stall: usize,
    mode: OrbitMode,
) -> MitraLanguage {
    let classes: Vec<CyclicWord> =
        CyclicWord::enumerate(phi.rank(), r).into_iter().filter(|c| *c <= c.inverse()).collect();
    let parts: Vec<FactorLanguage> =
        classes
        .par_iter()
        .map(|h| match mode {
            OrbitMode::Union => orbit_language(phi, h, k, n_max, stall),
            OrbitMode::Tail => orbit_tail_language(phi, h, k, n_max, stall),
        })
        .collect();
    let stabilized = parts.iter().all(|p| p.is_stabilized());
    let mut words = BTreeSet::new();
    for p in parts {
        words.extend(p.words);
    }
    MitraLanguage { language: FactorLanguage::from_closed(k, words, stabilized, Provenance::Orbit, None), classes }
}

/// Factors of `X.prefix(probe)`; stabilized when doubling the probe once adds
/// nothing.
pub fn ray_language(x: &Ray, k: usize, probe: usize) -> Result<FactorLanguage, LaminationError> {
    let probe = probe.max(k);
    let long = x.prefix(2 * probe).map_err(|e| LaminationError::Undecided(e.to_string()))?;
    let mut short = LanguageAccumulator::new(k);
    short.add_linear(&long.letters()[..probe.min(long.len())]);
    let grew = short.add_linear(long.letters());
    Ok(short.finish(!grew, Provenance::Ray, None))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum LeafVerdict {
    No { witness: ReducedWord },
    Consistent { depth: usize, stabilized: bool },
}

impl LeafVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, LeafVerdict::Consistent { .. })
    }
}

/// Slides length-`k` windows over the central `2(k + slack)` letters of the
/// leaf `(x, y)` and looks them up in `lang`.
pub fn leaf_test(
    lang: &FactorLanguage,
    x: &Ray,
    y: &Ray,
    k: usize,
    slack: usize,
    params: &WindowParams,
) -> Result<LeafVerdict, LaminationError> {
    if k > lang.depth() || k == 0 {
        return Err(LaminationError::DepthTooLarge { k, depth: lang.depth() });
    }
    let window = match leaf_window(x, y, k + slack, params) {
        WindowOutcome::Window(w) => w,
        WindowOutcome::Undecided(reason) => return Err(LaminationError::Undecided(reason)),
    };
    for factor in window.center.letters().windows(k) {
        if !lang.contains(factor) {
            return Ok(LeafVerdict::No { witness: ReducedWord::from_reduced_unchecked(factor.to_vec()) });
        }
    }
    Ok(LeafVerdict::Consistent { depth: k, stabilized: lang.is_stabilized() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageOrder {
    Equal,
    Subset,
    Superset,
    Incomparable,
}

/// Compares the two languages truncated to their common depth.
pub fn language_compare(a: &FactorLanguage, b: &FactorLanguage) -> LanguageOrder {
    let k = a.depth().min(b.depth());
    let (a, b) = (a.truncate(k), b.truncate(k));
    match (a.words.is_subset(&b.words), b.words.is_subset(&a.words)) {
        (true, true) => LanguageOrder::Equal,
        (true, false) => LanguageOrder::Subset,
        (false, true) => LanguageOrder::Superset,
        (false, false) => LanguageOrder::Incomparable,
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Classes sorted by least member, members ascending.
    pub(crate) fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// Outcome of testing one pair of rays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub outcome: PairOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum PairOutcome {
    Consistent,
    No { witness: ReducedWord },
    Undecided { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub components: Vec<Vec<usize>>,
    pub pairs: Vec<PairVerdict>,
}

impl Partition {
    pub fn undecided(&self) -> impl Iterator<Item = &PairVerdict> {
        self.pairs.iter().filter(|p| matches!(p.outcome, PairOutcome::Undecided { .. }))
    }

    pub fn largest(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Components of the graph on `rays` whose edges are leaf-consistent pairs.
/// Undecided pairs are not edges and are reported.
pub fn diag_components(
    rays: &[Ray],
    lang: &FactorLanguage,
    k: usize,
    slack: usize,
    params: &WindowParams,
) -> Result<Partition, LaminationError> {
    if k > lang.depth() || k == 0 {
        return Err(LaminationError::DepthTooLarge { k, depth: lang.depth() });
    }
    let pairs: Vec<(usize, usize)> =
        (0..rays.len()).flat_map(|i| (i + 1..rays.len()).map(move |j| (i, j))).collect();
    let verdicts: Vec<PairVerdict> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let outcome = match leaf_test(lang, &rays[i], &rays[j], k, slack, params) {
                Ok(LeafVerdict::Consistent { .. }) => PairOutcome::Consistent,
                Ok(LeafVerdict::No { witness }) => PairOutcome::No { witness },
                Err(e) => PairOutcome::Undecided { reason: e.to_string() },
            };
            PairVerdict { i, j, outcome }
        })
        .collect();
    let mut uf = UnionFind::new(rays.len());
    for v in &verdicts {
        if v.outcome == PairOutcome::Consistent {
            uf.union(v.i, v.j);
        }
    }
    Ok(Partition { components: uf.classes(), pairs: verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Basis;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn cw(s: &str) -> CyclicWord {
        s.parse().unwrap()
    }

    fn set(words: &[&str]) -> BTreeSet<ReducedWord> {
        let mut s: BTreeSet<ReducedWord> = words.iter().map(|x| w(x)).collect();
        let inv: Vec<_> = s.iter().map(|x| x.inverse()).collect();
        s.extend(inv);
        s
    }

    fn tribonacci() -> Automorphism {
        let b = Basis::new(3).unwrap();
        Automorphism::new(b, vec![w("ab"), w("ac"), w("a")], Some(vec![w("c"), w("Ca"), w("Cb")])).unwrap()
    }

    fn per(s: &str) -> Ray {
        Ray::power_of(&w(s)).unwrap()
    }

    fn fixed_ray(phi: &Automorphism) -> Ray {
        let params = crate::automorphism::LimitParams::for_map(phi);
        let known = phi.limit_prefix(1, &w("a"), 32, &params).unwrap();
        Ray::iterated(Arc::new(phi.clone()), 1, w("a"), known, params)
    }

    /// Independent enumeration: all factors of the biinfinite word `...www...`.
    fn naive_periodic_factors(s: &str, k: usize) -> BTreeSet<ReducedWord> {
        let long = s.repeat(k + 2);
        let mut out = BTreeSet::new();
        for i in 0..s.len() {
            for j in 1..=k {
                let f = w(&long[i..i + j]);
                out.insert(f.inverse());
                out.insert(f);
            }
        }
        out
    }

    #[test]
    fn rational_examples() {
        assert_eq!(rational_language(&cw("ab"), 2).words(), &set(&["a", "b", "ab", "ba"]));
        assert_eq!(rational_language(&cw("a"), 3).words(), &set(&["a", "aa", "aaa"]));
        for k in 1..6 {
            let c = cw("abC");
            assert_eq!(rational_language(&c, k).words(), rational_language(&c.inverse(), k).words());
            assert_eq!(rational_language(&c, k).words(), &naive_periodic_factors("abC", k));
        }
    }

    #[test]
    fn orbit_examples() {
        let phi = tribonacci();
        let l = orbit_language(&phi, &cw("a"), 2, 6, 3);
        assert_eq!(l.words(), &set(&["a", "b", "c", "ab", "ba", "ac", "ca", "aa"]));
        let l0 = orbit_language(&phi, &cw("ab"), 3, 0, 5);
        assert_eq!(l0.words(), rational_language(&cw("ab"), 3).words());
        let l3 = orbit_language(&phi, &cw("ab"), 4, 3, 100);
        let l5 = orbit_language(&phi, &cw("ab"), 4, 5, 100);
        assert!(l3.words().is_subset(l5.words()));
        assert!(orbit_language(&phi, &cw("a"), 6, 30, 5).is_stabilized());
    }

    #[test]
    fn mitra_examples() {
        let phi = tribonacci();
        let m1 = mitra_language(&phi, 1, 3, 20, 5, OrbitMode::Tail);
        assert_eq!(m1.classes, vec![cw("a"), cw("b"), cw("c")]);
        let m2 = mitra_language(&phi, 2, 2, 20, 5, OrbitMode::Tail);
        assert_eq!(m2.language.words(), orbit_language(&phi, &cw("a"), 2, 20, 5).words());
        assert!(m2.language.is_stabilized());
        let tail = mitra_language(&phi, 2, 6, 30, 5, OrbitMode::Tail);
        assert!(tail.language.words().is_superset(orbit_tail_language(&phi, &cw("a"), 6, 30, 5).words()));
        let union = mitra_language(&phi, 2, 6, 30, 5, OrbitMode::Union);
        assert!(union.language.words().is_superset(orbit_language(&phi, &cw("a"), 6, 30, 5).words()));
        // transient factor of the n = 0 term
        assert!(union.language.contains(w("aaaaaa").letters()));
        assert!(!tail.language.contains(w("aaaaaa").letters()));
        m2.language.audit().unwrap();
    }

    #[test]
    fn tail_drops_transient_factors() {
        let phi = tribonacci();
        let tail = orbit_tail_language(&phi, &cw("bb"), 2, 30, 5);
        assert!(tail.is_stabilized());
        assert!(!tail.contains(w("bb").letters()));
        assert_eq!(tail.words(), orbit_language(&phi, &cw("a"), 2, 30, 5).words());
        assert!(orbit_language(&phi, &cw("bb"), 2, 30, 5).contains(w("bb").letters()));
    }

    #[test]
    fn ray_language_examples() {
        assert_eq!(ray_language(&per("a"), 2, 16).unwrap().words(), &set(&["a", "aa"]));
        assert_eq!(
            ray_language(&per("ab"), 4, 16).unwrap().words(),
            rational_language(&cw("ab"), 4).words()
        );
        let phi = tribonacci();
        let x = fixed_ray(&phi);
        assert_eq!(ray_language(&x, 2, 64).unwrap().words(), orbit_language(&phi, &cw("a"), 2, 6, 3).words());
    }

    #[test]
    fn leaf_test_examples() {
        let phi = tribonacci();
        let lang = orbit_language(&phi, &cw("a"), 2, 30, 5);
        let params = WindowParams::default();
        // b^∞ against its inverse direction: window ...BBbb...
        let v = leaf_test(&lang, &per("b"), &per("B"), 2, 2, &params).unwrap();
        assert!(matches!(v, LeafVerdict::No { witness } if witness == w("BB") || witness == w("bb")));
        let rational = rational_language(&cw("ab"), 4);
        let v = leaf_test(&rational, &per("ab"), &per("BA"), 4, 4, &params).unwrap();
        assert_eq!(v, LeafVerdict::Consistent { depth: 4, stabilized: true });
        assert!(matches!(
            leaf_test(&rational, &per("a"), &per("a"), 2, 2, &params),
            Err(LaminationError::Undecided(_))
        ));
        assert!(matches!(leaf_test(&rational, &per("a"), &per("b"), 5, 2, &params), Err(LaminationError::DepthTooLarge { .. })));
    }

    #[test]
    fn compare_examples() {
        let phi = tribonacci();
        let a = orbit_language(&phi, &cw("a"), 4, 30, 5);
        assert_eq!(language_compare(&a, &a), LanguageOrder::Equal);
        let small = orbit_language(&phi, &cw("a"), 4, 1, 5);
        assert_eq!(language_compare(&small, &a), LanguageOrder::Subset);
        assert_eq!(language_compare(&a, &small), LanguageOrder::Superset);
        let inv = orbit_language(&phi.inverse().unwrap(), &cw("a"), 4, 30, 5);
        assert_eq!(language_compare(&a, &inv), LanguageOrder::Incomparable);
    }

    #[test]
    fn components_examples() {
        let params = WindowParams::default();
        let rational = rational_language(&cw("ab"), 4);
        let axis = per("ab");
        let rays = [axis.clone(), per("BA"), per("ab").translate(&w("ab")).translate(&w("B"))];
        let p = diag_components(&rays[..2], &rational, 3, 3, &params).unwrap();
        assert_eq!(p.components, vec![vec![0, 1]]);
        let lang = orbit_language(&tribonacci(), &cw("a"), 3, 30, 5);
        let p = diag_components(&[per("b"), per("B")], &lang, 2, 2, &params).unwrap();
        assert_eq!(p.components, vec![vec![0], vec![1]]);
        let p = diag_components(&[per("b")], &lang, 2, 2, &params).unwrap();
        assert_eq!(p.components, vec![vec![0]]);
        assert!(p.pairs.is_empty());
    }

    #[test]
    fn text_round_trip() {
        let l = orbit_language(&tribonacci(), &cw("a"), 2, 30, 5);
        let text = l.to_text();
        assert!(text.starts_with("lamlang depth=2 stabilized=1 provenance=orbit\n"));
        let back = FactorLanguage::from_text(&text).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.to_text(), text);
        assert!(FactorLanguage::from_text("lamlang depth=2 stabilized=1 provenance=orbit\nab\n").is_err());
        assert!(FactorLanguage::from_text("lamlang depth=2\n").is_err());
    }

    fn small_word() -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(0usize..6, 1..8).prop_map(|v| ReducedWord::reduce(v.into_iter().map(Letter::from_code)))
    }

    proptest! {
        #[test]
        fn from_words_is_closed(ws in prop::collection::vec(small_word(), 0..6), k in 1usize..6) {
            let l = FactorLanguage::from_words(k, ws, false, Provenance::Ray);
            prop_assert!(l.audit().is_ok());
            for x in l.words() {
                prop_assert!(l.contains(x.letters()));
            }
        }

        #[test]
        fn leaf_test_is_flip_symmetric(u in small_word(), v in small_word(), k in 1usize..4) {
            prop_assume!(!u.is_identity() && !v.is_identity());
            let x = Ray::power_of(&u).unwrap();
            let y = Ray::power_of(&v).unwrap();
            prop_assume!(x.compare(&y, 0) == crate::word::RayEq::DistinctCertified);
            let lang = orbit_language(&tribonacci(), &cw("a"), 4, 30, 5);
            let p = WindowParams::default();
            let a = leaf_test(&lang, &x, &y, k, k, &p).map(|v| v.is_consistent());
            let b = leaf_test(&lang, &y, &x, k, k, &p).map(|v| v.is_consistent());
            prop_assert_eq!(a, b);
        }

        #[test]
        fn rational_leaf_is_consistent(u in small_word(), k in 1usize..6) {
            prop_assume!(!u.is_identity());
            let c = CyclicWord::of(&u).unwrap();
            let lang = rational_language(&c, k);
            let v = leaf_test(&lang, &Ray::power_of(&u).unwrap(), &Ray::power_of(&u.inverse()).unwrap(), k, k, &WindowParams::default()).unwrap();
            prop_assert!(v.is_consistent());
        }

        #[test]
        fn orbit_monotone_in_depth(h in small_word(), k in 1usize..5) {
            prop_assume!(!h.is_identity());
            let c = CyclicWord::of(&h).unwrap();
            let phi = tribonacci();
            let lo = orbit_language(&phi, &c, k, 8, 100);
            let hi = orbit_language(&phi, &c, k + 1, 8, 100);
            let cut = hi.truncate(k);
            prop_assert_eq!(cut.words(), lo.words());
        }
    }
}
