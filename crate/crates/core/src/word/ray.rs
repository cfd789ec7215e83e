use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{common_prefix_len, Letter, ReducedWord, WordError};
use crate::automorphism::{AutError, Automorphism, LimitParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RayError {
    #[error("prefix iteration failed: {0}")]
    Iteration(#[from] AutError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A point of `∂F_N`, given by a coherent generator of its finite prefixes.
#[derive(Clone)]
pub enum Ray {
    /// `head · period^∞` in canonical form: `period` is primitive and
    /// cyclically reduced, `head · period` is reduced, and `head` is as short
    /// as possible.
    Periodic { head: ReducedWord, period: ReducedWord },
    /// Limit of `ψ^{power·n}(seed)`. `known` is a prefix certified when the
    /// ray was produced; longer prefixes are recomputed on demand.
    Iterated { map: Arc<Automorphism>, power: u32, seed: ReducedWord, known: ReducedWord, params: LimitParams },
    /// The translate `by · ray`.
    Translate { by: ReducedWord, ray: Box<Ray> },
}

/// Three-valued equality of boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayEq {
    EqualCertified,
    DistinctCertified,
    UndecidedAtDepth(usize),
}

impl Ray {
    /// `w^∞`.
    pub fn power_of(w: &ReducedWord) -> Result<Ray, WordError> {
        Ray::periodic(&ReducedWord::identity(), w)
    }

    /// `head · period^∞`, normalized.
    pub fn periodic(head: &ReducedWord, period: &ReducedWord) -> Result<Ray, WordError> {
        if period.is_identity() {
            return Err(WordError::Identity);
        }
        let (outer, core) = period.cyclic_core();
        let mut head = head.multiply(&outer).into_letters();
        let mut cyc = core.into_letters();
        while let Some(&last) = head.last() {
            if last != cyc[0].inverse() {
                break;
            }
            head.pop();
            cyc.rotate_left(1);
        }
        let root = primitive_root_len(&cyc);
        cyc.truncate(root);
        while let (Some(&h), Some(&c)) = (head.last(), cyc.last()) {
            if h != c {
                break;
            }
            head.pop();
            cyc.rotate_right(1);
        }
        Ok(Ray::Periodic {
            head: ReducedWord::from_reduced_unchecked(head),
            period: ReducedWord::from_reduced_unchecked(cyc),
        })
    }

    pub fn iterated(
        map: Arc<Automorphism>,
        power: u32,
        seed: ReducedWord,
        known: ReducedWord,
        params: LimitParams,
    ) -> Ray {
        Ray::Iterated { map, power, seed, known, params }
    }

    /// The translate `u · self`. Periodic rays stay periodic.
    pub fn translate(&self, u: &ReducedWord) -> Ray {
        if u.is_identity() {
            return self.clone();
        }
        match self {
            Ray::Periodic { head, period } => {
                Ray::periodic(&u.multiply(head), period).expect("period is nontrivial")
            }
            Ray::Translate { by, ray } => Ray::Translate { by: u.multiply(by), ray: ray.clone() }.simplify(),
            _ => Ray::Translate { by: u.clone(), ray: Box::new(self.clone()) },
        }
    }

    fn simplify(self) -> Ray {
        match self {
            Ray::Translate { by, ray } if by.is_identity() => *ray,
            r => r,
        }
    }

    /// The length-`n` prefix. Coherent: `prefix(n)` is an initial segment of
    /// `prefix(m)` for `n ≤ m`.
    pub fn prefix(&self, n: usize) -> Result<ReducedWord, RayError> {
        match self {
            Ray::Periodic { head, period } => {
                let mut letters: Vec<Letter> = Vec::with_capacity(n);
                letters.extend(head.letters().iter().take(n));
                let p = period.letters();
                let mut i = 0;
                while letters.len() < n {
                    letters.push(p[i % p.len()]);
                    i += 1;
                }
                Ok(ReducedWord::from_reduced_unchecked(letters))
            }
            Ray::Iterated { map, power, seed, known, params } => {
                if n <= known.len() {
                    return Ok(known.prefix(n));
                }
                Ok(map.limit_prefix(*power, seed, n, params)?)
            }
            Ray::Translate { by, ray } => {
                let tail = ray.prefix(n + by.len())?;
                Ok(by.multiply(&tail).prefix(n))
            }
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Ray::Periodic { .. })
    }

    /// Exact for two periodic rays; otherwise decided by prefixes up to `depth`.
    pub fn compare(&self, other: &Ray, depth: usize) -> RayEq {
        if let (Ray::Periodic { head: h1, period: p1 }, Ray::Periodic { head: h2, period: p2 }) = (self, other) {
            return if h1 == h2 && p1 == p2 { RayEq::EqualCertified } else { RayEq::DistinctCertified };
        }
        match (self.prefix(depth), other.prefix(depth)) {
            (Ok(a), Ok(b)) if a != b => RayEq::DistinctCertified,
            _ => RayEq::UndecidedAtDepth(depth),
        }
    }

    /// Short description of how the ray is generated.
    pub fn tag(&self) -> String {
        match self {
            Ray::Periodic { head, period } if head.is_identity() => format!("({period})^inf"),
            Ray::Periodic { head, period } => format!("{head}({period})^inf"),
            Ray::Iterated { power, seed, .. } => format!("lim psi^{power}n({seed})"),
            Ray::Translate { by, ray } => format!("{by}.{}", ray.tag()),
        }
    }
}

impl fmt::Debug for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prefix(12) {
            Ok(p) => write!(f, "Ray({} = {p}...)", self.tag()),
            Err(_) => write!(f, "Ray({})", self.tag()),
        }
    }
}

fn primitive_root_len(c: &[Letter]) -> usize {
    let n = c.len();
    (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| c[i] == c[i - d])).unwrap_or(n)
}

/// Central factor of radius `k` of the biinfinite reduced word `Y⁻¹X`,
/// centered at the junction of the two half-leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafWindow {
    pub center: ReducedWord,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowOutcome {
    Window(LeafWindow),
    Undecided(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    /// Rays must diverge within this many letters.
    pub probe: usize,
    /// First prefix length tried; doubled until `probe` is reached.
    pub start: usize,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams { probe: 64, start: 16 }
    }
}

/// Window of radius `k` around the junction of the leaf `(x, y)`.
///
/// After the common prefix of length `d`, the reduced word `Y⁻¹X` is exactly
/// `(y[d..])⁻¹ · x[d..]` with no further cancellation, so the window is
/// `(y[d..d+k])⁻¹ · x[d..d+k]`.
pub fn leaf_window(x: &Ray, y: &Ray, k: usize, params: &WindowParams) -> WindowOutcome {
    if x.compare(y, 0) == RayEq::EqualCertified {
        return WindowOutcome::Undecided("rays are equal".into());
    }
    let mut n = params.start.clamp(1, params.probe.max(1));
    let d = loop {
        let (px, py) = match (x.prefix(n), y.prefix(n)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return WindowOutcome::Undecided(e.to_string()),
        };
        let d = px.common_prefix_len(&py);
        if d < n {
            break d;
        }
        if n >= params.probe {
            return WindowOutcome::Undecided(format!("rays agree on {n} letters"));
        }
        n = (2 * n).min(params.probe);
    };
    let (px, py) = match (x.prefix(d + k), y.prefix(d + k)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return WindowOutcome::Undecided(e.to_string()),
    };
    debug_assert_eq!(common_prefix_len(px.letters(), py.letters()), d);
    let left = py.suffix_from(d).inverse();
    let right = px.suffix_from(d);
    let mut letters = left.into_letters();
    letters.extend_from_slice(right.letters());
    WindowOutcome::Window(LeafWindow { center: ReducedWord::from_reduced_unchecked(letters), radius: k })
}
