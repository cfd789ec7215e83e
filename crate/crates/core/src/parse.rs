//! Input file formats.
//!
//! Automorphism file:
//!
//! ```text
//! # comment
//! rank 3
//! a -> ab
//! b -> ac
//! c -> a
//! inverse:
//! a -> c
//! b -> Ca
//! c -> Cb
//! ```
//!
//! `rank` is optional (inferred from the image lines). An `assert <text>`
//! line records a claim about the map; it is copied into reports, not
//! checked.
//!
//! Train-track file: either `graph rose N`, or `vertices V` followed by one
//! `edge U W` line per edge (edges are named `a`, `b`, ... in order); then
//! one `map x -> path` line per edge.
//!
//! Subgroup file: one generator word per line.

use std::fmt;

use thiserror::Error;

use crate::automorphism::{AutError, Automorphism};
use crate::traintrack::{GraphMap, MarkedGraph, TrainTrackError};
use crate::word::{Basis, Letter, ReducedWord, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Non-empty lines with comments stripped, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_word(line: usize, s: &str) -> Result<ReducedWord, ParseError> {
    s.trim().parse::<ReducedWord>().map_err(|e: WordError| err(line, e.to_string()))
}

/// `x -> w` with `x` a single positive letter.
fn parse_rule(line: usize, s: &str) -> Result<(Letter, ReducedWord), ParseError> {
    let (lhs, rhs) = s.split_once("->").ok_or_else(|| err(line, format!("expected `x -> word`, got {s:?}")))?;
    let mut chars = lhs.trim().chars();
    let (Some(c), None) = (chars.next(), chars.next()) else {
        return Err(err(line, format!("left side {:?} is not a single letter", lhs.trim())));
    };
    let x = Letter::from_char(c).map_err(|e| err(line, e.to_string()))?;
    if x.is_inverse() {
        return Err(err(line, format!("left side {c:?} must be a generator, not an inverse")));
    }
    if rhs.trim().is_empty() {
        return Err(err(line, format!("missing image for {c}")));
    }
    Ok((x, parse_word(line, rhs)?))
}

/// Images indexed by generator; every generator `0..n` must appear once.
fn collect_images(rules: Vec<(usize, Letter, ReducedWord)>, rank: usize, what: &str) -> Result<Vec<ReducedWord>, ParseError> {
    let mut images: Vec<Option<ReducedWord>> = vec![None; rank];
    for (line, x, w) in rules {
        let slot = images
            .get_mut(x.generator())
            .ok_or_else(|| err(line, format!("{x} is outside rank {rank}")))?;
        if slot.is_some() {
            return Err(err(line, format!("{x} has two {what} images")));
        }
        *slot = Some(w);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| err(0, format!("no {what} image for {}", Letter::new(i, false)))))
        .collect()
}

#[derive(Debug, Clone)]
pub struct AutomorphismFile {
    pub automorphism: Automorphism,
    pub assertions: Vec<String>,
}

pub fn parse_automorphism(text: &str, budget: usize) -> Result<AutomorphismFile, ParseError> {
    let mut rank = None;
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    let mut in_inverse = false;
    let mut assertions = Vec::new();
    for (line, s) in content_lines(text) {
        if let Some(rest) = s.strip_prefix("rank") {
            let n: usize = rest.trim().parse().map_err(|_| err(line, format!("bad rank {:?}", rest.trim())))?;
            rank = Some(n);
        } else if s == "inverse:" || s == "inverse" {
            in_inverse = true;
        } else if let Some(rest) = s.strip_prefix("assert") {
            assertions.push(rest.trim().to_string());
        } else {
            let (x, w) = parse_rule(line, s)?;
            if in_inverse {
                backward.push((line, x, w));
            } else {
                forward.push((line, x, w));
            }
        }
    }
    let rank = rank.unwrap_or(forward.len());
    let basis = Basis::new(rank).map_err(|e| err(0, e.to_string()))?;
    let images = collect_images(forward, rank, "forward")?;
    let inverse = if backward.is_empty() { None } else { Some(collect_images(backward, rank, "inverse")?) };
    let automorphism = Automorphism::new(basis, images, inverse)
        .map_err(|e: AutError| err(0, e.to_string()))?
        .with_budget(budget);
    Ok(AutomorphismFile { automorphism, assertions })
}

pub fn parse_traintrack(text: &str) -> Result<GraphMap, ParseError> {
    let mut graph: Option<MarkedGraph> = None;
    let mut vertices: Option<usize> = None;
    let mut edges = Vec::new();
    let mut maps = Vec::new();
    let mut map_line = 0;
    for (line, s) in content_lines(text) {
        let mut fields = s.split_whitespace();
        match fields.next() {
            Some("graph") => {
                let (Some("rose"), Some(n), None) = (fields.next(), fields.next(), fields.next()) else {
                    return Err(err(line, "expected `graph rose N`"));
                };
                let n: usize = n.parse().map_err(|_| err(line, format!("bad edge count {n:?}")))?;
                graph = Some(MarkedGraph::rose(n));
            }
            Some("vertices") => {
                let n = fields.next().and_then(|n| n.parse().ok()).ok_or_else(|| err(line, "expected `vertices V`"))?;
                vertices = Some(n);
            }
            Some("edge") => {
                let ends: Vec<usize> = fields.map(|f| f.parse().map_err(|_| err(line, format!("bad vertex {f:?}")))).collect::<Result<_, _>>()?;
                let [u, v] = ends[..] else {
                    return Err(err(line, "expected `edge U W`"));
                };
                edges.push((u, v));
            }
            Some("map") => {
                let rest = s["map".len()..].trim();
                let (x, w) = parse_rule(line, rest)?;
                maps.push((line, x, w));
                map_line = map_line.max(line);
            }
            _ => return Err(err(line, format!("unrecognized line {s:?}"))),
        }
    }
    let graph = match (graph, vertices) {
        (Some(g), None) if edges.is_empty() => g,
        (None, Some(v)) => MarkedGraph::new(v, edges).map_err(|e| err(0, e.to_string()))?,
        _ => return Err(err(0, "give either `graph rose N` or `vertices` with `edge` lines")),
    };
    let images = collect_images(maps, graph.edge_count(), "edge")?;
    GraphMap::new(graph, images).map_err(|e: TrainTrackError| err(map_line, e.to_string()))
}

pub fn parse_subgroup(text: &str, basis: &Basis) -> Result<Vec<ReducedWord>, ParseError> {
    content_lines(text)
        .map(|(line, s)| {
            let w = parse_word(line, s)?;
            basis.check(&w).map_err(|e| err(line, e.to_string()))?;
            Ok(w)
        })
        .collect()
}
