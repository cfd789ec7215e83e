//! Automorphisms of `F_N` given by basis images, and arithmetic in the
//! mapping torus `G_Φ = F_N ⋊_Φ ⟨t⟩` with `t·w·t⁻¹ = Φ(w)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::word::{Basis, CyclicWord, Letter, ReducedWord, Reducer, WordError};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutError {
    #[error("word length budget of {budget} letters exceeded")]
    Budget { budget: usize },
    #[error("negative power requested but no inverse images were supplied")]
    NoInverse,
    #[error("supplied inverse images do not invert the map: {0}")]
    BadInverse(String),
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("iteration of {seed} did not converge: {reason}")]
    NoConvergence { seed: String, reason: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// An automorphism `Φ` of `F_N`, stored by the images of the basis letters.
#[derive(Clone, PartialEq, Eq)]
pub struct Automorphism {
    basis: Basis,
    images: Vec<ReducedWord>,
    inverse_images: Option<Vec<ReducedWord>>,
    budget: usize,
}

impl Automorphism {
    /// Builds `Φ`, verifying the inverse images when they are supplied.
    pub fn new(
        basis: Basis,
        images: Vec<ReducedWord>,
        inverse_images: Option<Vec<ReducedWord>>,
    ) -> Result<Self, AutError> {
        let n = basis.rank();
        if images.len() != n {
            return Err(AutError::ImageCount { expected: n, got: images.len() });
        }
        for w in images.iter().chain(inverse_images.iter().flatten()) {
            basis.check(w)?;
        }
        if let Some(inv) = &inverse_images {
            if inv.len() != n {
                return Err(AutError::ImageCount { expected: n, got: inv.len() });
            }
        }
        let aut = Automorphism { basis, images, inverse_images, budget: DEFAULT_BUDGET };
        if aut.inverse_images.is_some() {
            aut.verify_inverse()?;
        }
        Ok(aut)
    }

    fn verify_inverse(&self) -> Result<(), AutError> {
        let inv = self.inverse()?;
        for g in 0..self.rank() {
            let x = ReducedWord::letter(Letter::new(g, false));
            let there = self.apply(&inv.apply(&x)?)?;
            let back = inv.apply(&self.apply(&x)?)?;
            if there != x || back != x {
                return Err(AutError::BadInverse(format!(
                    "{x} -> Φ(Φ⁻¹({x})) = {there}, Φ⁻¹(Φ({x})) = {back}"
                )));
            }
        }
        Ok(())
    }

    pub fn identity(basis: Basis) -> Self {
        let images: Vec<ReducedWord> =
            (0..basis.rank()).map(|g| ReducedWord::letter(Letter::new(g, false))).collect();
        Automorphism { basis, inverse_images: Some(images.clone()), images, budget: DEFAULT_BUDGET }
    }

    /// `ad_u : x ↦ u·x·u⁻¹`.
    pub fn inner(basis: Basis, u: &ReducedWord) -> Self {
        let ui = u.inverse();
        let conj = |a: &ReducedWord, b: &ReducedWord, g: usize| {
            a.multiply(&ReducedWord::letter(Letter::new(g, false))).multiply(b)
        };
        let images = (0..basis.rank()).map(|g| conj(u, &ui, g)).collect();
        let inverse = (0..basis.rank()).map(|g| conj(&ui, u, g)).collect();
        Automorphism { basis, images, inverse_images: Some(inverse), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn images(&self) -> &[ReducedWord] {
        &self.images
    }

    pub fn inverse_images(&self) -> Option<&[ReducedWord]> {
        self.inverse_images.as_deref()
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse_images.is_some()
    }

    /// Longest basis image.
    pub fn lipschitz(&self) -> usize {
        self.images.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn image_of(&self, l: Letter) -> ReducedWord {
        let img = &self.images[l.generator()];
        if l.is_inverse() {
            img.inverse()
        } else {
            img.clone()
        }
    }

    /// Homomorphic image of `u`, freely reduced.
    pub fn apply(&self, u: &ReducedWord) -> Result<ReducedWord, AutError> {
        self.basis.check(u)?;
        let mut r = Reducer::with_capacity(u.len() * self.lipschitz().max(1));
        for &l in u.letters() {
            let img = self.images[l.generator()].letters();
            if l.is_inverse() {
                r.extend(img.iter().rev().map(|x| x.inverse()));
            } else {
                r.extend(img.iter().copied());
            }
            if r.len() > self.budget {
                return Err(AutError::Budget { budget: self.budget });
            }
        }
        Ok(r.finish())
    }

    /// Image of a conjugacy class.
    pub fn apply_cyclic(&self, c: &CyclicWord) -> Result<CyclicWord, AutError> {
        Ok(CyclicWord::of(&self.apply(&c.linear())?)?)
    }

    pub fn inverse(&self) -> Result<Automorphism, AutError> {
        let inv = self.inverse_images.clone().ok_or(AutError::NoInverse)?;
        Ok(Automorphism {
            basis: self.basis.clone(),
            images: inv,
            inverse_images: Some(self.images.clone()),
            budget: self.budget,
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Result<Automorphism, AutError> {
        let images = other.images.iter().map(|w| self.apply(w)).collect::<Result<Vec<_>, _>>()?;
        let inverse_images = match (&self.inverse_images, &other.inverse_images) {
            (Some(_), Some(_)) => {
                let si = self.inverse()?;
                let oi = other.inverse()?;
                Some(si.images.iter().map(|w| oi.apply(w)).collect::<Result<Vec<_>, _>>()?)
            }
            _ => None,
        };
        Ok(Automorphism { basis: self.basis.clone(), images, inverse_images, budget: self.budget.min(other.budget) })
    }

    /// `Φⁿ`; negative powers need inverse images.
    pub fn power(&self, n: i64) -> Result<Automorphism, AutError> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut out = Automorphism::identity(self.basis.clone()).with_budget(self.budget);
        if n != 0 && !base.has_inverse() {
            out.inverse_images = None;
        }
        for _ in 0..n.unsigned_abs() {
            out = base.compose(&out)?;
        }
        Ok(out)
    }

    /// `Φⁿ(u)` by repeated application.
    pub fn power_apply(&self, n: i64, u: &ReducedWord) -> Result<ReducedWord, AutError> {
        let inv;
        let map = if n < 0 {
            inv = self.inverse()?;
            &inv
        } else {
            self
        };
        let mut w = u.clone();
        for _ in 0..n.unsigned_abs() {
            w = map.apply(&w)?;
        }
        Ok(w)
    }

    /// Estimated bounded-cancellation constant: the longest cancellation
    /// between `Φ(u)` and `Φ(v)` over short reduced `u·v`, doubled.
    pub fn cancellation_estimate(&self) -> usize {
        let radius = if self.rank() <= 4 { 2 } else { 1 };
        let ball: Vec<(ReducedWord, ReducedWord)> = self
            .basis
            .ball(radius)
            .into_iter()
            .skip(1)
            .filter_map(|u| self.apply(&u).ok().map(|img| (u, img)))
            .collect();
        let mut worst = 0;
        for (u, iu) in &ball {
            for (v, iv) in &ball {
                if u.last() == v.first().map(|l| l.inverse()) {
                    continue;
                }
                let c = iu
                    .letters()
                    .iter()
                    .rev()
                    .zip(iv.letters())
                    .take_while(|(x, y)| **x == y.inverse())
                    .count();
                worst = worst.max(c);
            }
        }
        2 * worst + 2
    }

    /// Prefix of length `target` of `lim ψ^{power·n}(seed)`.
    ///
    /// Words are kept truncated to a working length; after a truncation only
    /// `|ψ(x)| − margin` letters of an image are trusted. Convergence means
    /// two consecutive pairs of iterates agree on `target` letters.
    pub fn limit_prefix(
        &self,
        power: u32,
        seed: &ReducedWord,
        target: usize,
        params: &LimitParams,
    ) -> Result<ReducedWord, AutError> {
        let fail = |reason: &str| AutError::NoConvergence { seed: seed.to_string(), reason: reason.into() };
        let work = 2 * target + 4 * params.margin + 16;
        let mut cur = seed.clone();
        let mut exact = true;
        let mut best = 0usize;
        let mut stagnant = 0usize;
        let mut streak = 0usize;
        for _ in 0..params.max_apps.max(target + 8) {
            let mut next = cur.clone();
            for _ in 0..power.max(1) {
                let img = self.apply(&next)?;
                next = if exact { img } else { img.prefix(img.len().saturating_sub(params.margin)) };
                if next.len() > work {
                    next = next.prefix(work);
                    exact = false;
                }
                if next.is_empty() {
                    return Err(fail("cancellation consumed the tracked prefix"));
                }
            }
            if exact && next == cur {
                return Err(fail("seed is fixed"));
            }
            let common = cur.common_prefix_len(&next);
            if common >= target {
                streak += 1;
                if streak >= 2 {
                    return Ok(next.prefix(target));
                }
            } else {
                streak = 0;
            }
            if common > best {
                best = common;
                stagnant = 0;
            } else {
                stagnant += 1;
                if stagnant >= params.stall_apps {
                    return Err(fail("common prefix stopped growing"));
                }
            }
            cur = next;
        }
        Err(fail("iteration cap reached"))
    }
}

/// Knobs for [`Automorphism::limit_prefix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitParams {
    pub max_apps: usize,
    pub stall_apps: usize,
    pub margin: usize,
}

impl LimitParams {
    pub fn for_map(map: &Automorphism) -> Self {
        LimitParams { max_apps: 48, stall_apps: 4, margin: map.cancellation_estimate() }
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.basis.symbols().zip(&self.images).map(|(x, w)| format!("{x} -> {w}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// An automorphism together with an inner twist, representing `ad_u ∘ Φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterData {
    pub automorphism: Automorphism,
    pub twist: ReducedWord,
}

impl OuterData {
    pub fn new(automorphism: Automorphism) -> Self {
        OuterData { automorphism, twist: ReducedWord::identity() }
    }

    pub fn twisted(&self, u: &ReducedWord) -> OuterData {
        OuterData { automorphism: self.automorphism.clone(), twist: u.multiply(&self.twist) }
    }

    /// The lift `ad_twist ∘ Φ`.
    pub fn lift(&self) -> Result<Automorphism, AutError> {
        Automorphism::inner(self.automorphism.basis().clone(), &self.twist).compose(&self.automorphism)
    }
}

/// Element `w·t^m` of `G_Φ` in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MappingTorusElement {
    pub w: ReducedWord,
    pub m: i64,
}

impl MappingTorusElement {
    pub fn new(w: ReducedWord, m: i64) -> Self {
        MappingTorusElement { w, m }
    }

    pub fn identity() -> Self {
        MappingTorusElement { w: ReducedWord::identity(), m: 0 }
    }

    pub fn t() -> Self {
        MappingTorusElement { w: ReducedWord::identity(), m: 1 }
    }
}

impl fmt::Display for MappingTorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.w, self.m)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid element `{0}`: expected `<word>,<integer>`")]
pub struct ElementParseError(pub String);

impl FromStr for MappingTorusElement {
    type Err = ElementParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ElementParseError(s.to_string());
        let (w, m) = s.split_once(',').ok_or_else(err)?;
        let w: ReducedWord = w.trim().parse().map_err(|_| err())?;
        let m: i64 = m.trim().parse().map_err(|_| err())?;
        Ok(MappingTorusElement { w, m })
    }
}

/// The mapping torus group `G_Φ`.
#[derive(Debug, Clone)]
pub struct MappingTorus {
    phi: Arc<Automorphism>,
}

impl MappingTorus {
    pub fn new(phi: Automorphism) -> Self {
        MappingTorus { phi: Arc::new(phi) }
    }

    pub fn phi(&self) -> &Automorphism {
        &self.phi
    }

    pub fn rank(&self) -> usize {
        self.phi.rank()
    }

    /// `(u, a)·(v, b) = (u·Φ^a(v), a + b)`.
    pub fn multiply(
        &self,
        g: &MappingTorusElement,
        h: &MappingTorusElement,
    ) -> Result<MappingTorusElement, AutError> {
        let moved = self.phi.power_apply(g.m, &h.w)?;
        Ok(MappingTorusElement { w: g.w.multiply(&moved), m: g.m + h.m })
    }

    /// `(u, a)⁻¹ = (Φ^{-a}(u⁻¹), −a)`.
    pub fn inverse(&self, g: &MappingTorusElement) -> Result<MappingTorusElement, AutError> {
        Ok(MappingTorusElement { w: self.phi.power_apply(-g.m, &g.w.inverse())?, m: -g.m })
    }

    pub fn power(&self, g: &MappingTorusElement, k: i64) -> Result<MappingTorusElement, AutError> {
        let base = if k < 0 { self.inverse(g)? } else { g.clone() };
        let mut out = MappingTorusElement::identity();
        for _ in 0..k.unsigned_abs() {
            out = self.multiply(&out, &base)?;
        }
        Ok(out)
    }

    /// `c·g·c⁻¹`.
    pub fn conjugate(
        &self,
        c: &MappingTorusElement,
        g: &MappingTorusElement,
    ) -> Result<MappingTorusElement, AutError> {
        self.multiply(&self.multiply(c, g)?, &self.inverse(c)?)
    }

    /// The action `x ↦ g·x·g⁻¹ = w·Φ^m(x)·w⁻¹` of `g = w·t^m` on `F_N`.
    pub fn conjugation_automorphism(&self, g: &MappingTorusElement) -> Result<Automorphism, AutError> {
        let basis = self.phi.basis().clone();
        let twist = Automorphism::inner(basis, &g.w).with_budget(self.phi.budget());
        twist.compose(&self.phi.power(g.m)?)
    }

    /// Whether `g = h^k` for some `k ≥ 2` and `h = (v, m/k)` with `|v| ≤ radius`.
    pub fn is_proper_power(&self, g: &MappingTorusElement, radius: usize) -> Result<bool, AutError> {
        if g.m == 0 {
            return Ok(!g.w.is_identity() && CyclicWord::of(&g.w)?.is_proper_power());
        }
        let ball = self.phi.basis().ball(radius);
        for k in 2..=g.m.unsigned_abs() as i64 {
            if g.m % k != 0 {
                continue;
            }
            for v in &ball {
                let h = MappingTorusElement::new(v.clone(), g.m / k);
                if &self.power(&h, k)? == g {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Searches `c = (u, j)` with `|u| ≤ radius`, `|j| ≤ exp` and `c·g·c⁻¹ = h`.
    pub fn conjugator_search(
        &self,
        g: &MappingTorusElement,
        h: &MappingTorusElement,
        radius: usize,
        exp: i64,
    ) -> Result<Option<MappingTorusElement>, AutError> {
        if g.m != h.m {
            return Ok(None);
        }
        for u in self.phi.basis().ball(radius) {
            for j in (0..=exp).flat_map(|j| if j == 0 { vec![0] } else { vec![j, -j] }) {
                let c = MappingTorusElement::new(u.clone(), j);
                if &self.conjugate(&c, g)? == h {
                    return Ok(Some(c));
                }
            }
        }
        Ok(None)
    }

    /// All `u·g·u⁻¹` for `u ∈ F_N`, `|u| ≤ radius`.
    pub fn fn_conjugates(
        &self,
        g: &MappingTorusElement,
        radius: usize,
    ) -> Result<Vec<(ReducedWord, MappingTorusElement)>, AutError> {
        self.phi
            .basis()
            .ball(radius)
            .into_iter()
            .map(|u| {
                let c = MappingTorusElement::new(u.clone(), 0);
                Ok((u, self.conjugate(&c, g)?))
            })
            .collect()
    }
}

/// Conjugacy classes `[w]`, `|w| ≤ max_len`, with `Φⁿ[w] = [w]` for some
/// `1 ≤ n ≤ max_power`, each with its least such `n`. An empty result is
/// necessary but not sufficient evidence of atoroidality.
pub fn periodic_class_scan(
    phi: &Automorphism,
    max_len: usize,
    max_power: u32,
) -> Result<Vec<(CyclicWord, u32)>, AutError> {
    let mut found = Vec::new();
    for c in CyclicWord::enumerate(phi.rank(), max_len) {
        let mut x = c.clone();
        for n in 1..=max_power {
            x = phi.apply_cyclic(&x)?;
            if x == c {
                found.push((c.clone(), n));
                break;
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn words(v: &[&str]) -> Vec<ReducedWord> {
        v.iter().map(|s| w(s)).collect()
    }

    fn tribonacci() -> Automorphism {
        Automorphism::new(Basis::new(3).unwrap(), words(&["ab", "ac", "a"]), Some(words(&["c", "Ca", "Cb"])))
            .unwrap()
    }

    #[test]
    fn apply_examples() {
        let phi = tribonacci();
        assert_eq!(phi.apply(&w("C")).unwrap(), w("A"));
        assert_eq!(phi.compose(&phi).unwrap().apply(&w("a")).unwrap(), w("abac"));
        let id = Automorphism::identity(Basis::new(3).unwrap());
        assert_eq!(id.apply(&w("aBc")).unwrap(), w("aBc"));
        assert!(matches!(phi.apply(&w("d")), Err(AutError::Word(WordError::BasisMismatch { .. }))));
    }

    #[test]
    fn power_apply_examples() {
        let phi = tribonacci();
        assert_eq!(phi.power_apply(0, &w("aB")).unwrap(), w("aB"));
        assert_eq!(phi.power_apply(3, &w("a")).unwrap(), w("abacaba"));
        let no_inv = Automorphism::new(Basis::new(3).unwrap(), words(&["ab", "ac", "a"]), None).unwrap();
        assert_eq!(no_inv.power_apply(-1, &w("a")), Err(AutError::NoInverse));
    }

    #[test]
    fn bad_inverse_rejected() {
        let r = Automorphism::new(Basis::new(3).unwrap(), words(&["ab", "ac", "a"]), Some(words(&["c", "a", "b"])));
        assert!(matches!(r, Err(AutError::BadInverse(_))));
    }

    #[test]
    fn budget_trips() {
        let phi = tribonacci().with_budget(50);
        assert_eq!(phi.power_apply(10, &w("a")), Err(AutError::Budget { budget: 50 }));
    }

    #[test]
    fn inner_examples() {
        let basis = Basis::new(3).unwrap();
        assert_eq!(Automorphism::inner(basis.clone(), &ReducedWord::identity()), Automorphism::identity(basis.clone()));
        assert_eq!(Automorphism::inner(basis, &w("a")).apply(&w("b")).unwrap(), w("abA"));
    }

    #[test]
    fn mapping_torus_examples() {
        let g = MappingTorus::new(tribonacci());
        let t = MappingTorusElement::t();
        let t_inv = MappingTorusElement::new(ReducedWord::identity(), -1);
        let x = MappingTorusElement::new(w("bC"), 0);
        let lhs = g.multiply(&g.multiply(&t, &x).unwrap(), &t_inv).unwrap();
        assert_eq!(lhs, MappingTorusElement::new(g.phi().apply(&w("bC")).unwrap(), 0));
        let prod = g.multiply(&MappingTorusElement::new(w("a"), 1), &MappingTorusElement::new(w("b"), -1)).unwrap();
        assert_eq!(prod, MappingTorusElement::new(w("aac"), 0));
    }

    #[test]
    fn conjugation_automorphism_examples() {
        let g = MappingTorus::new(tribonacci());
        assert_eq!(g.conjugation_automorphism(&MappingTorusElement::t()).unwrap().images(), tribonacci().images());
        let basis = Basis::new(3).unwrap();
        assert_eq!(
            g.conjugation_automorphism(&MappingTorusElement::new(w("a"), 0)).unwrap(),
            Automorphism::inner(basis, &w("a"))
        );
        let psi = g.conjugation_automorphism(&MappingTorusElement::new(w("a"), 1)).unwrap();
        assert_eq!(psi.apply(&w("b")).unwrap(), w("aacA"));
    }

    #[test]
    fn element_parsing() {
        assert_eq!("1,1".parse::<MappingTorusElement>().unwrap(), MappingTorusElement::t());
        assert_eq!("aB,-2".parse::<MappingTorusElement>().unwrap(), MappingTorusElement::new(w("aB"), -2));
        assert!("a,x".parse::<MappingTorusElement>().is_err());
        assert!("a".parse::<MappingTorusElement>().is_err());
    }

    #[test]
    fn periodic_scan_examples() {
        let basis = Basis::new(3).unwrap();
        let inner = Automorphism::inner(basis.clone(), &w("a"));
        let classes = CyclicWord::enumerate(3, 2);
        let found = periodic_class_scan(&inner, 2, 3).unwrap();
        assert_eq!(found.len(), classes.len());
        assert!(found.iter().all(|(_, p)| *p == 1));
        let id = periodic_class_scan(&Automorphism::identity(basis), 2, 1).unwrap();
        assert_eq!(id.len(), classes.len());
        assert!(periodic_class_scan(&tribonacci(), 4, 6).unwrap().is_empty());
    }

    #[test]
    fn proper_power_detection() {
        let g = MappingTorus::new(tribonacci());
        let h = MappingTorusElement::new(w("a"), 1);
        let h2 = g.power(&h, 2).unwrap();
        assert!(g.is_proper_power(&h2, 2).unwrap());
        assert!(!g.is_proper_power(&h, 2).unwrap());
        assert!(g.is_proper_power(&MappingTorusElement::new(ReducedWord::identity(), 2), 1).unwrap());
    }

    #[test]
    fn conjugator_search_finds_twist() {
        let g = MappingTorus::new(tribonacci());
        let x = MappingTorusElement::new(w("a"), 1);
        let y = MappingTorusElement::new(w("ab"), 1);
        let c = g.conjugator_search(&x, &y, 1, 0).unwrap().expect("a⁻¹ conjugates");
        assert_eq!(g.conjugate(&c, &x).unwrap(), y);
    }

    #[test]
    fn limit_prefix_fixed_ray() {
        let phi = tribonacci();
        let params = LimitParams::for_map(&phi);
        let p = phi.limit_prefix(1, &w("a"), 13, &params).unwrap();
        assert_eq!(p, w("abacabaabacab"));
        let inner = Automorphism::inner(Basis::new(3).unwrap(), &w("a"));
        let p = inner.limit_prefix(1, &w("b"), 10, &LimitParams::for_map(&inner)).unwrap();
        assert_eq!(p, w("aaaaaaaaaa"));
        assert!(phi.limit_prefix(1, &w("A"), 10, &params).is_err());
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((0usize..6).prop_map(Letter::from_code), 0..=max).prop_map(ReducedWord::reduce)
    }

    fn element_strategy() -> impl Strategy<Value = MappingTorusElement> {
        (word_strategy(5), -2i64..=2).prop_map(|(w, m)| MappingTorusElement::new(w, m))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn apply_is_homomorphism(u in word_strategy(8), v in word_strategy(8)) {
            let phi = tribonacci();
            prop_assert_eq!(phi.apply(&u.multiply(&v)).unwrap(), phi.apply(&u).unwrap().multiply(&phi.apply(&v).unwrap()));
        }

        #[test]
        fn power_round_trip(u in word_strategy(8)) {
            let phi = tribonacci();
            let there = phi.power_apply(-1, &u).unwrap();
            prop_assert_eq!(phi.power_apply(1, &there).unwrap(), u);
        }

        #[test]
        fn inner_is_homomorphic(u in word_strategy(5), v in word_strategy(5)) {
            let basis = Basis::new(3).unwrap();
            let lhs = Automorphism::inner(basis.clone(), &u).compose(&Automorphism::inner(basis.clone(), &v)).unwrap();
            let rhs = Automorphism::inner(basis, &u.multiply(&v));
            prop_assert_eq!(lhs.images(), rhs.images());
        }

        #[test]
        fn mt_group_laws(g in element_strategy(), h in element_strategy(), k in element_strategy()) {
            let mt = MappingTorus::new(tribonacci());
            let lhs = mt.multiply(&mt.multiply(&g, &h).unwrap(), &k).unwrap();
            let rhs = mt.multiply(&g, &mt.multiply(&h, &k).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let gi = mt.inverse(&g).unwrap();
            prop_assert_eq!(mt.multiply(&g, &gi).unwrap(), MappingTorusElement::identity());
            prop_assert_eq!(mt.multiply(&gi, &g).unwrap(), MappingTorusElement::identity());
        }

        #[test]
        fn conjugation_is_homomorphism(g in element_strategy(), h in element_strategy()) {
            let mt = MappingTorus::new(tribonacci());
            let gh = mt.multiply(&g, &h).unwrap();
            let lhs = mt.conjugation_automorphism(&gh).unwrap();
            let rhs = mt.conjugation_automorphism(&g).unwrap().compose(&mt.conjugation_automorphism(&h).unwrap()).unwrap();
            prop_assert_eq!(lhs.images(), rhs.images());
        }
    }
}
