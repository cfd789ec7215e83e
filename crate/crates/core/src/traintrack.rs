//! User-supplied train-track maps: validity, transition matrix,
//! Perron-Frobenius data, and the edge-iteration language of the attracting
//! lamination.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::automorphism::{Automorphism, DEFAULT_BUDGET};
use crate::lamination::{FactorLanguage, LanguageAccumulator, Provenance, StageInfo};
use crate::word::{Letter, ReducedWord, Reducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrainTrackError {
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: usize, vertex: usize },
    #[error("expected {expected} edge images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("image of edge {0} is empty")]
    CollapsedEdge(char),
    #[error("image of edge {edge} is not a path: {detail}")]
    NotAPath { edge: char, detail: String },
    #[error("vertex map is inconsistent at vertex {0}")]
    InconsistentVertexMap(usize),
    #[error("letter {0} is not an edge of the graph")]
    UnknownEdge(char),
    #[error("word length budget of {budget} letters exceeded")]
    Budget { budget: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is zero")]
    Zero,
    #[error("matrix is reducible")]
    Reducible,
    #[error("power iteration did not reach tolerance {tol} in {iterations} steps")]
    NoConvergence { tol: f64, iterations: usize },
}

/// A finite connected graph; edge `i` runs from `edges[i].0` to `edges[i].1`
/// and is named by the `i`-th letter, its reverse by the capital letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl MarkedGraph {
    /// One vertex with `n` loops, identified with the basis generators.
    pub fn rose(n: usize) -> Self {
        MarkedGraph { vertices: 1, edges: vec![(0, 0); n] }
    }

    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, TrainTrackError> {
        if edges.is_empty() {
            return Err(TrainTrackError::NoEdges);
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(TrainTrackError::UnknownVertex { edge: i, vertex: u.max(v) });
            }
        }
        let g = MarkedGraph { vertices, edges };
        if !g.is_connected() {
            return Err(TrainTrackError::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_rose(&self) -> bool {
        self.vertices == 1
    }

    pub fn origin(&self, l: Letter) -> usize {
        let (u, v) = self.edges[l.generator()];
        if l.is_inverse() {
            v
        } else {
            u
        }
    }

    pub fn terminus(&self, l: Letter) -> usize {
        self.origin(l.inverse())
    }

    /// Oriented edges, i.e. directions at their origins.
    pub fn oriented_edges(&self) -> impl Iterator<Item = Letter> {
        (0..2 * self.edges.len()).map(Letter::from_code)
    }
}

/// A turn: an unordered pair of directions at a common vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn(pub Letter, pub Letter);

impl Turn {
    fn new(a: Letter, b: Letter) -> Self {
        if a <= b {
            Turn(a, b)
        } else {
            Turn(b, a)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.0 == self.1
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrainTrackVerdict {
    Pass,
    /// `turn` is crossed by the image of `edge` and becomes degenerate after
    /// `iterate` applications of the direction map.
    Fail { turn: Turn, edge: Letter, iterate: usize },
}

impl TrainTrackVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, TrainTrackVerdict::Pass)
    }
}

/// A graph self-map sending each edge to a tight edge path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMap {
    graph: MarkedGraph,
    images: Vec<ReducedWord>,
    vertex_map: Vec<usize>,
    budget: usize,
}

impl GraphMap {
    pub fn new(graph: MarkedGraph, images: Vec<ReducedWord>) -> Result<Self, TrainTrackError> {
        if images.len() != graph.edge_count() {
            return Err(TrainTrackError::ImageCount { expected: graph.edge_count(), got: images.len() });
        }
        let mut vertex_map: Vec<Option<usize>> = vec![None; graph.vertex_count()];
        for (i, img) in images.iter().enumerate() {
            let name = Letter::new(i, false).to_char();
            let (Some(first), Some(last)) = (img.first(), img.last()) else {
                return Err(TrainTrackError::CollapsedEdge(name));
            };
            if let Some(l) = img.letters().iter().find(|l| l.generator() >= graph.edge_count()) {
                return Err(TrainTrackError::UnknownEdge(l.to_char()));
            }
            for pair in img.letters().windows(2) {
                if graph.terminus(pair[0]) != graph.origin(pair[1]) {
                    return Err(TrainTrackError::NotAPath {
                        edge: name,
                        detail: format!("{} does not end where {} starts", pair[0], pair[1]),
                    });
                }
            }
            let e = Letter::new(i, false);
            for (v, w) in [(graph.origin(e), graph.origin(first)), (graph.terminus(e), graph.terminus(last))] {
                match vertex_map[v] {
                    Some(x) if x != w => return Err(TrainTrackError::InconsistentVertexMap(v)),
                    _ => vertex_map[v] = Some(w),
                }
            }
        }
        let vertex_map = vertex_map.into_iter().map(|v| v.expect("connected graph")).collect();
        Ok(GraphMap { graph, images, vertex_map, budget: DEFAULT_BUDGET })
    }

    /// The rose representative of an automorphism (edges = generators).
    pub fn from_automorphism(phi: &Automorphism) -> Result<Self, TrainTrackError> {
        GraphMap::new(MarkedGraph::rose(phi.rank()), phi.images().to_vec()).map(|g| g.with_budget(phi.budget()))
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    /// Image of an edge path, tightened.
    pub fn apply(&self, path: &ReducedWord) -> Result<ReducedWord, TrainTrackError> {
        let mut r = Reducer::with_capacity(path.len() * 2);
        for &l in path.letters() {
            let img = self.images.get(l.generator()).ok_or(TrainTrackError::UnknownEdge(l.to_char()))?;
            if l.is_inverse() {
                r.extend(img.letters().iter().rev().map(|x| x.inverse()));
            } else {
                r.extend(img.letters().iter().copied());
            }
            if r.len() > self.budget {
                return Err(TrainTrackError::Budget { budget: self.budget });
            }
        }
        Ok(r.finish())
    }

    /// `Df`: first oriented edge of the image of an oriented edge.
    pub fn direction_map(&self, d: Letter) -> Letter {
        let img = &self.images[d.generator()];
        if d.is_inverse() {
            img.last().expect("nonempty").inverse()
        } else {
            img.first().expect("nonempty")
        }
    }

    /// Checks that no edge image crosses an illegal turn. Turns crossed by
    /// iterated images are `Df`-images of turns crossed by edge images, so
    /// following each turn's orbit under `Df` for `max_iter` steps covers them.
    pub fn validate_train_track(&self, max_iter: usize) -> TrainTrackVerdict {
        for e in 0..self.graph.edge_count() {
            let edge = Letter::new(e, false);
            for pair in self.images[e].letters().windows(2) {
                let turn = Turn::new(pair[0].inverse(), pair[1]);
                let mut t = turn;
                for iterate in 1..=max_iter {
                    t = Turn::new(self.direction_map(t.0), self.direction_map(t.1));
                    if t.is_degenerate() {
                        return TrainTrackVerdict::Fail { turn, edge, iterate };
                    }
                }
            }
        }
        TrainTrackVerdict::Pass
    }

    /// Entry `(e, f)` counts occurrences of `f` or `f⁻¹` in the image of `e`.
    pub fn transition_matrix(&self) -> TransitionMatrix {
        let n = self.graph.edge_count();
        let mut rows = vec![vec![0u64; n]; n];
        for (e, img) in self.images.iter().enumerate() {
            for l in img.letters() {
                rows[e][l.generator()] += 1;
            }
        }
        TransitionMatrix { rows }
    }

    /// Length-`≤ k` factors of `fⁿ(e)` over all edges `e` and `n ≥ 0`,
    /// closed under inversion. Stops once the set is unchanged for `stall`
    /// consecutive `n`, after `n_max` stages, or when the length budget trips.
    pub fn bfh_language(&self, k: usize, stall: usize, n_max: usize) -> FactorLanguage {
        let mut acc = LanguageAccumulator::new(k);
        let mut words: Vec<ReducedWord> =
            (0..self.graph.edge_count()).map(|e| ReducedWord::letter(Letter::new(e, false))).collect();
        for w in &words {
            acc.add_linear(w.letters());
        }
        let mut info = StageInfo::default();
        let mut unchanged = 0;
        let mut stabilized = false;
        for n in 1..=n_max {
            let next: Result<Vec<_>, _> = words.iter().map(|w| self.apply(w)).collect();
            let Ok(next) = next else {
                info.budget_exceeded = true;
                break;
            };
            words = next;
            info.computed = n;
            let grew = words.iter().fold(false, |g, w| acc.add_linear(w.letters()) | g);
            if grew {
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
        if n_max == 0 && stall == 0 {
            stabilized = true;
        }
        acc.finish(stabilized, Provenance::Bfh, Some(info))
    }
}

/// Square nonnegative integer matrix indexed by unoriented edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionMatrix {
    pub rows: Vec<Vec<u64>>,
}

/// Perron-Frobenius eigenvalue with its positive right eigenvector
/// (normalized to sum 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfData {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub iterations: usize,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<u64>>) -> Self {
        TransitionMatrix { rows }
    }

    pub fn identity(n: usize) -> Self {
        TransitionMatrix { rows: (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect() }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.size();
        TransitionMatrix { rows: (0..n).map(|i| (0..n).map(|j| self.rows[j][i]).collect()).collect() }
    }

    pub fn multiply(&self, other: &TransitionMatrix) -> Self {
        let n = self.size();
        let mut rows = vec![vec![0u64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|l| self.rows[i][l] * other.rows[l][j]).sum();
            }
        }
        TransitionMatrix { rows }
    }

    /// Strong connectivity of the support digraph.
    pub fn is_irreducible(&self) -> bool {
        let n = self.size();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let edge = if forward { self.rows[i][j] } else { self.rows[j][i] };
                    if edge > 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        n > 0 && reach(true) && reach(false)
    }

    /// Power iteration on `M + I` (primitive whenever `M` is irreducible) from
    /// the uniform vector, until successive eigenvalue estimates differ by
    /// less than `tol`.
    pub fn pf_eigen(&self, tol: f64) -> Result<PfData, PfError> {
        let n = self.size();
        if n == 0 {
            return Err(PfError::Empty);
        }
        if self.rows.iter().flatten().all(|&x| x == 0) {
            return Err(PfError::Zero);
        }
        if !self.is_irreducible() {
            return Err(PfError::Reducible);
        }
        const MAX_ITER: usize = 1_000_000;
        let mut v = vec![1.0 / n as f64; n];
        let mut previous = f64::NAN;
        for it in 1..=MAX_ITER {
            let mut w: Vec<f64> = (0..n)
                .map(|i| v[i] + self.rows[i].iter().zip(&v).map(|(&a, &x)| a as f64 * x).sum::<f64>())
                .collect();
            let total: f64 = w.iter().sum();
            let estimate = total - 1.0;
            w.iter_mut().for_each(|x| *x /= total);
            v = w;
            if (estimate - previous).abs() < tol {
                return Ok(PfData { eigenvalue: estimate, eigenvector: v, iterations: it });
            }
            previous = estimate;
        }
        Err(PfError::NoConvergence { tol, iterations: MAX_ITER })
    }
}

/// Convenience: PF eigenvalue only.
pub fn pf_eigenvalue(m: &TransitionMatrix, tol: f64) -> Result<f64, PfError> {
    m.pf_eigen(tol).map(|d| d.eigenvalue)
}
