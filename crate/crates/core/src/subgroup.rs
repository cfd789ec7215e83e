//! Stallings graphs of finitely generated subgroups and carried rays/leaves.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::lamination::UnionFind;
use crate::word::{leaf_window, Basis, Letter, Ray, ReducedWord, WindowOutcome, WindowParams};

const NO_EDGE: usize = usize::MAX;

/// Folded core graph with basepoint `0`. `next[v][code]` is the endpoint of
/// the edge leaving `v` reading the letter with that code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    rank: usize,
    next: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum IndexKind {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum CarriedVerdict {
    CarriedAtDepth { depth: usize },
    /// No start vertex reads the first `witness_depth` letters.
    NotCarried { witness_depth: usize },
    Undecided { reason: String },
}

impl SubgroupGraph {
    /// Wedge of generator loops, folded and trimmed to its core.
    pub fn build(basis: &Basis, generators: &[ReducedWord]) -> Result<SubgroupGraph, crate::word::WordError> {
        let mut vertices = 1usize;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new(); // (from, generator, to)
        for g in generators {
            basis.check(g)?;
            let n = g.len();
            if n == 0 {
                continue;
            }
            let mut prev = 0;
            for (i, l) in g.letters().iter().enumerate() {
                let to = if i + 1 == n {
                    0
                } else {
                    vertices += 1;
                    vertices - 1
                };
                if l.is_inverse() {
                    edges.push((to, l.generator(), prev));
                } else {
                    edges.push((prev, l.generator(), to));
                }
                prev = to;
            }
        }
        let mut uf = UnionFind::new(vertices);
        loop {
            let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
            let mut merged = false;
            for &(u, gen, v) in &edges {
                let (ru, rv) = (uf.find(u), uf.find(v));
                for (key, target) in [((ru, 2 * gen), rv), ((rv, 2 * gen + 1), ru)] {
                    match seen.get(&key) {
                        Some(&t) if uf.find(t) != uf.find(target) => {
                            uf.union(t, target);
                            merged = true;
                        }
                        Some(_) => {}
                        None => {
                            seen.insert(key, target);
                        }
                    }
                }
            }
            if !merged {
                break;
            }
        }
        let mut folded: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        for &(u, gen, v) in &edges {
            folded.insert((uf.find(u), gen, uf.find(v)));
        }
        let mut edges: Vec<(usize, usize, usize)> = folded.into_iter().collect();
        let base = uf.find(0);
        loop {
            let mut degree: HashMap<usize, usize> = HashMap::new();
            for &(u, _, v) in &edges {
                *degree.entry(u).or_default() += 1;
                *degree.entry(v).or_default() += 1;
            }
            let before = edges.len();
            edges.retain(|&(u, _, v)| {
                let leaf = |x: usize| x != base && degree[&x] <= 1;
                !(leaf(u) || leaf(v))
            });
            if edges.len() == before {
                break;
            }
        }
        Ok(SubgroupGraph::relabel(basis.rank(), base, &edges))
    }

    /// Breadth-first numbering from the basepoint in letter order.
    fn relabel(rank: usize, base: usize, edges: &[(usize, usize, usize)]) -> SubgroupGraph {
        let mut adj: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for &(u, gen, v) in edges {
            adj.entry(u).or_default().push((2 * gen, v));
            adj.entry(v).or_default().push((2 * gen + 1, u));
        }
        let mut ids: HashMap<usize, usize> = HashMap::from([(base, 0)]);
        let mut order = vec![base];
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            let mut out = adj.get(&v).cloned().unwrap_or_default();
            out.sort();
            for (_, w) in out {
                if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(w) {
                    e.insert(order.len());
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        let mut next = vec![vec![NO_EDGE; 2 * rank]; order.len()];
        for &(u, gen, v) in edges {
            next[ids[&u]][2 * gen] = ids[&v];
            next[ids[&v]][2 * gen + 1] = ids[&u];
        }
        SubgroupGraph { rank, next }
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    pub fn edge_count(&self) -> usize {
        self.next.iter().flat_map(|row| row.iter().step_by(2)).filter(|&&t| t != NO_EDGE).count()
    }

    /// Labeled edges `(from, generator, to)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (v, row) in self.next.iter().enumerate() {
            for gen in 0..self.rank {
                if row[2 * gen] != NO_EDGE {
                    out.push((v, gen, row[2 * gen]));
                }
            }
        }
        out
    }

    pub fn is_folded(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges().into_iter().all(|(u, g, v)| seen.insert((u, 2 * g)) && seen.insert((v, 2 * g + 1)))
    }

    /// Number of letters of `letters` readable from `start`.
    fn read(&self, start: usize, letters: &[Letter]) -> (usize, usize) {
        let mut v = start;
        for (i, l) in letters.iter().enumerate() {
            match self.next[v].get(l.code()) {
                Some(&t) if t != NO_EDGE => v = t,
                _ => return (i, v),
            }
        }
        (letters.len(), v)
    }

    /// Membership: `w` reads a loop at the basepoint.
    pub fn accepts(&self, w: &ReducedWord) -> bool {
        let (n, end) = self.read(0, w.letters());
        n == w.len() && end == 0
    }

    pub fn index_kind(&self) -> IndexKind {
        if self.next.iter().all(|row| row.iter().all(|&t| t != NO_EDGE)) {
            IndexKind::Finite(self.vertex_count())
        } else {
            IndexKind::Infinite
        }
    }

    /// Longest prefix of `letters` readable from some vertex.
    fn best_read(&self, letters: &[Letter]) -> usize {
        (0..self.vertex_count()).map(|v| self.read(v, letters).0).max().unwrap_or(0)
    }

    /// Whether some translate of `x` is read inside the graph up to `depth`.
    pub fn carries_ray(&self, x: &Ray, depth: usize) -> CarriedVerdict {
        match x.prefix(depth) {
            Ok(p) => {
                let best = self.best_read(p.letters());
                if best >= depth {
                    CarriedVerdict::CarriedAtDepth { depth }
                } else {
                    CarriedVerdict::NotCarried { witness_depth: best + 1 }
                }
            }
            Err(e) => CarriedVerdict::Undecided { reason: e.to_string() },
        }
    }

    /// Whether the central window of radius `depth` of the leaf `(x, y)` is
    /// read by a single path in the graph. The witness is the smallest radius
    /// whose window no vertex reads.
    pub fn carries_leaf(&self, x: &Ray, y: &Ray, depth: usize, params: &WindowParams) -> CarriedVerdict {
        let window = match leaf_window(x, y, depth, params) {
            WindowOutcome::Window(w) => w.center,
            WindowOutcome::Undecided(reason) => return CarriedVerdict::Undecided { reason },
        };
        let letters = window.letters();
        let mid = letters.len() / 2;
        for r in 1..=depth {
            let part = &letters[mid.saturating_sub(r)..(mid + r).min(letters.len())];
            if self.best_read(part) < part.len() {
                return CarriedVerdict::NotCarried { witness_depth: r };
            }
        }
        CarriedVerdict::CarriedAtDepth { depth }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn build(rank: usize, gens: &[&str]) -> SubgroupGraph {
        let gens: Vec<_> = gens.iter().map(|s| w(s)).collect();
        SubgroupGraph::build(&Basis::new(rank).unwrap(), &gens).unwrap()
    }

    fn per(s: &str) -> Ray {
        Ray::power_of(&w(s)).unwrap()
    }

    /// Reduced products of at most `len` generators and inverses.
    fn brute_elements(gens: &[ReducedWord], len: usize) -> BTreeSet<ReducedWord> {
        let mut all: Vec<ReducedWord> = gens.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
        all.retain(|g| !g.is_identity());
        let mut layer = vec![ReducedWord::identity()];
        let mut out: BTreeSet<ReducedWord> = layer.iter().cloned().collect();
        for _ in 0..len {
            layer = layer.iter().flat_map(|x| all.iter().map(move |g| x.multiply(g))).collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    #[test]
    fn build_examples() {
        let h = build(3, &["a", "b"]);
        assert_eq!(h.vertex_count(), 1);
        assert_eq!(h.edges(), vec![(0, 0, 0), (0, 1, 0)]);
        assert_eq!(build(3, &["ab", "a"]), h);
        let trivial = build(3, &[]);
        assert_eq!(trivial.vertex_count(), 1);
        assert_eq!(trivial.edge_count(), 0);
        assert!(trivial.accepts(&w("1")));
        assert!(!trivial.accepts(&w("a")));
    }

    #[test]
    fn accepts_examples() {
        let h = build(3, &["a", "b"]);
        assert!(h.accepts(&w("ab")));
        assert!(!h.accepts(&w("c")));
        let g = build(3, &["abA", "aac"]);
        assert!(g.accepts(&w("abacabA")));
        assert!(!g.accepts(&w("b")));
        assert!(g.is_folded());
    }

    #[test]
    fn index_examples() {
        assert_eq!(build(3, &["a", "b"]).index_kind(), IndexKind::Infinite);
        assert_eq!(build(3, &["a", "b", "c"]).index_kind(), IndexKind::Finite(1));
        assert_eq!(build(3, &["aa", "b", "abA", "c", "acA"]).index_kind(), IndexKind::Finite(2));
    }

    #[test]
    fn carried_ray_examples() {
        let h = build(3, &["a", "b"]);
        assert_eq!(h.carries_ray(&per("a"), 50), CarriedVerdict::CarriedAtDepth { depth: 50 });
        let trib = Ray::periodic(&w("abacaba"), &w("c")).unwrap();
        assert_eq!(h.carries_ray(&trib, 12), CarriedVerdict::NotCarried { witness_depth: 4 });
        let full = build(3, &["a", "b", "c"]);
        assert_eq!(full.carries_ray(&trib, 12), CarriedVerdict::CarriedAtDepth { depth: 12 });
        // translates are found from other vertices
        let g = build(2, &["ab"]);
        assert_eq!(g.carries_ray(&per("ba"), 9), CarriedVerdict::CarriedAtDepth { depth: 9 });
    }

    #[test]
    fn carried_leaf_examples() {
        let h = build(3, &["a", "b"]);
        let p = WindowParams::default();
        assert_eq!(h.carries_leaf(&per("a"), &per("b"), 8, &p), CarriedVerdict::CarriedAtDepth { depth: 8 });
        let full = build(3, &["a", "b", "c"]);
        assert_eq!(full.carries_leaf(&per("ac"), &per("Cb"), 8, &p), CarriedVerdict::CarriedAtDepth { depth: 8 });
        assert!(matches!(h.carries_leaf(&per("ac"), &per("b"), 8, &p), CarriedVerdict::NotCarried { .. }));
    }

    #[test]
    fn folding_confluence_under_shuffles() {
        let gens: Vec<ReducedWord> = ["abA", "bcB", "aab", "Cac"].iter().map(|s| w(s)).collect();
        let basis = Basis::new(3).unwrap();
        let reference = SubgroupGraph::build(&basis, &gens).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut g = gens.clone();
            g.shuffle(&mut rng);
            assert_eq!(SubgroupGraph::build(&basis, &g).unwrap(), reference);
        }
    }

    fn small_word() -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec(0usize..6, 1..5).prop_map(|v| ReducedWord::reduce(v.into_iter().map(Letter::from_code)))
    }

    proptest! {
        #[test]
        fn membership_matches_brute_force(gens in prop::collection::vec(small_word(), 1..4)) {
            let basis = Basis::new(3).unwrap();
            let h = SubgroupGraph::build(&basis, &gens).unwrap();
            prop_assert!(h.is_folded());
            for x in brute_elements(&gens, 3) {
                prop_assert!(h.accepts(&x), "{} should be accepted", x);
            }
        }

        #[test]
        fn finite_index_carries_everything(v in small_word()) {
            prop_assume!(!v.is_identity());
            let h = build(3, &["aa", "b", "abA", "c", "acA"]);
            prop_assert_eq!(h.carries_ray(&Ray::power_of(&v).unwrap(), 30), CarriedVerdict::CarriedAtDepth { depth: 30 });
        }
    }
}
