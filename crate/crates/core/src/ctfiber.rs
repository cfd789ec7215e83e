//! Fibers of the Cannon-Thurston map over rational points `g^∞`.
//!
//! The preimage of `g^∞` for `g = w·t^m` is searched among the attracting
//! fixed rays of powers of `ψ_g = ad_w ∘ Φ^m`. Rays are identified when their
//! leaf passes the window test in the lamination matching the sign of `m`.
//! All degrees are lower bounds at the configured depths.

use std::collections::BTreeSet;
use std::sync::Arc;

use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automorphism::{AutError, Automorphism, LimitParams, MappingTorus, MappingTorusElement};
use crate::config::AnalysisConfig;
use crate::lamination::{
    diag_components, leaf_test, mitra_language, FactorLanguage, LaminationError, LeafVerdict, OrbitMode,
    PairOutcome, Partition,
};
use crate::word::{CyclicWord, Letter, Ray, RayEq, ReducedWord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("element {0} has t-exponent 0; use the simple point check")]
    ZeroExponent(String),
    #[error("an inverse automorphism is required for negative exponents")]
    NoInverse,
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Lamination(#[from] LaminationError),
}

/// Depth-`k` approximations of `Λφ` and `Λφ⁻¹`.
#[derive(Debug, Clone)]
pub struct Languages {
    pub phi: FactorLanguage,
    pub phi_inverse: FactorLanguage,
    /// Classes whose orbits generated both languages.
    pub classes: Vec<CyclicWord>,
    pub rank: usize,
}

impl Languages {
    pub fn build(phi: &Automorphism, cfg: &AnalysisConfig) -> Result<Languages, FiberError> {
        let inv = phi.inverse().map_err(|_| FiberError::NoInverse)?;
        let forward = mitra_language(phi, cfg.ball, cfg.depth, cfg.iter_max, cfg.stall, OrbitMode::Tail);
        let backward = mitra_language(&inv, cfg.ball, cfg.depth, cfg.iter_max, cfg.stall, OrbitMode::Tail);
        Ok(Languages { phi: forward.language, phi_inverse: backward.language, classes: forward.classes, rank: phi.rank() })
    }

    pub fn stabilized(&self) -> bool {
        self.phi.is_stabilized() && self.phi_inverse.is_stabilized()
    }

    /// `(own, opposite)` for elements whose exponent has the sign of `m`.
    fn for_sign(&self, m: i64) -> (&FactorLanguage, &FactorLanguage) {
        if m > 0 {
            (&self.phi, &self.phi_inverse)
        } else {
            (&self.phi_inverse, &self.phi)
        }
    }
}

/// Knobs for [`attracting_rays`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttractorParams {
    pub period_max: usize,
    /// Certified prefix length of every emitted ray; also the dedup depth.
    pub target: usize,
    /// Seeds are `u·s·u⁻¹` for letters `s` and `|u| ≤ conjugator_radius`.
    pub conjugator_radius: usize,
    pub steps: usize,
}

impl AttractorParams {
    pub fn new(period_max: usize, target: usize) -> Self {
        AttractorParams { period_max, target, conjugator_radius: 2, steps: 48.max(12 * period_max) }
    }

    pub fn from_config(cfg: &AnalysisConfig) -> Self {
        AttractorParams::new(cfg.period_max, cfg.ray_target())
    }
}

#[derive(Debug, Clone)]
pub struct AttractingRays {
    pub rays: Vec<Ray>,
    pub seeds_tried: usize,
    pub seeds_converged: usize,
    /// Rays came from letters fixed by `ψ` because nothing converged.
    pub fallback: bool,
}

/// Trusted prefixes of `ψⁿ(seed)`, stopping at the first period `p` for
/// which every residue class mod `p` has converged. Returns the period and,
/// per residue `r`, the step index and the limit prefix.
fn seed_limits(
    psi: &Automorphism,
    seed: &ReducedWord,
    params: &AttractorParams,
    margin: usize,
) -> Result<Option<(usize, Vec<(usize, ReducedWord)>)>, AutError> {
    let target = params.target;
    let work = 2 * target + 4 * margin + 16;
    let mut seq = vec![seed.clone()];
    let mut exact = true;
    for n in 1..=params.steps {
        let img = psi.apply(&seq[n - 1])?;
        let mut next = if exact { img } else { img.prefix(img.len().saturating_sub(margin)) };
        if exact && next == seq[n - 1] {
            return Ok(None);
        }
        if next.len() > work {
            next = next.prefix(work);
            exact = false;
        }
        if next.is_empty() {
            return Ok(None);
        }
        seq.push(next);
        for p in 1..=params.period_max {
            if n < 3 * p {
                break;
            }
            let agree = |j: usize| seq[j].common_prefix_len(&seq[j - p]) >= target;
            if (n + 1 - p..=n).all(|j| agree(j) && agree(j - p)) {
                return Ok(Some((p, (n + 1 - p..=n).map(|j| (j, seq[j].prefix(target))).collect())));
            }
        }
    }
    Ok(None)
}

/// Attracting fixed rays of `ψ^p`, `p ≤ period_max`, reached from short
/// seeds; sorted by prefix and deduplicated at the target depth.
pub fn attracting_rays(psi: &Arc<Automorphism>, params: &AttractorParams) -> Result<AttractingRays, AutError> {
    let basis = psi.basis().clone();
    let conjugators = basis.ball(params.conjugator_radius);
    let seeds: BTreeSet<ReducedWord> = basis
        .letters()
        .flat_map(|s| {
            let s = ReducedWord::letter(s);
            conjugators.iter().map(move |u| u.multiply(&s).multiply(&u.inverse()))
        })
        .collect();
    let seeds: Vec<ReducedWord> = seeds.into_iter().collect();
    let margin = psi.cancellation_estimate();
    let outcomes: Vec<_> = seeds.par_iter().map(|s| seed_limits(psi, s, params, margin)).collect();

    let limit_params = LimitParams { margin, ..LimitParams::for_map(psi) };
    let mut found: Vec<(ReducedWord, Ray)> = Vec::new();
    let mut converged = 0;
    let mut first_error = None;
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        match outcome {
            Ok(Some((p, limits))) => {
                converged += 1;
                for (j, prefix) in limits {
                    if found.iter().any(|(q, _)| *q == prefix) {
                        continue;
                    }
                    let start = psi.power_apply(j as i64 % p as i64, seed)?;
                    let ray = Ray::iterated(psi.clone(), p as u32, start, prefix.clone(), limit_params);
                    found.push((prefix, ray));
                }
            }
            Ok(None) => debug!("seed {seed} did not converge"),
            Err(e) => {
                debug!("seed {seed}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    if found.is_empty() {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    found.sort_by(|a, b| a.0.letters().cmp(b.0.letters()));
    let mut rays: Vec<Ray> = found.into_iter().map(|(_, r)| r).collect();
    let mut fallback = false;
    if rays.is_empty() {
        warn!("no convergent seed; falling back to fixed letters");
        for l in basis.letters() {
            let s = ReducedWord::letter(l);
            if psi.apply(&s)? == s {
                rays.push(Ray::power_of(&s).expect("nontrivial"));
                fallback = true;
            }
        }
    }
    Ok(AttractingRays { rays, seeds_tried: seeds.len(), seeds_converged: converged, fallback })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    Simple,
    Regular,
    Singular,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointType {
    Phi,
    PhiInverse,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub two_n: usize,
    pub two_n_minus_2: usize,
    pub four_n_minus_5: usize,
    pub four_n_minus_1: usize,
}

impl Thresholds {
    pub fn for_rank(n: usize) -> Self {
        Thresholds { two_n: 2 * n, two_n_minus_2: 2 * n - 2, four_n_minus_5: 4 * n - 5, four_n_minus_1: 4 * n - 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBounds {
    #[serde(flatten)]
    pub thresholds: Thresholds,
    pub sigma_found: Option<usize>,
}

/// A consistent pair that is also consistent in the opposite language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossViolation {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub tested: usize,
    pub certified: bool,
    pub violations: Vec<CrossViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub element: MappingTorusElement,
    /// Ray prefixes of length `2·(depth + slack)`.
    #[serde(rename = "rays")]
    pub ray_prefixes: Vec<String>,
    pub ray_tags: Vec<String>,
    pub partition: Vec<Vec<usize>>,
    pub undecided_pairs: Vec<(usize, usize, String)>,
    pub degree_lower_bound: usize,
    pub class: PointClass,
    #[serde(rename = "type")]
    pub point_type: PointType,
    pub depth: usize,
    pub stabilized: bool,
    pub exhaustive_at_bounds: bool,
    pub cross_check: CrossCheck,
    pub degree_within_bound: bool,
    pub bounds: ReportBounds,
    pub config: AnalysisConfig,
    #[serde(skip)]
    pub rays: Vec<Ray>,
}

impl FiberReport {
    /// Invariant violations: degree above `2N` or a failed cross-check.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.degree_within_bound {
            out.push(format!(
                "{}: degree lower bound {} exceeds {}",
                self.element, self.degree_lower_bound, self.bounds.thresholds.two_n
            ));
        }
        for v in &self.cross_check.violations {
            out.push(format!("{}: pair ({}, {}) is consistent in both languages", self.element, v.i, v.j));
        }
        out
    }
}

fn classify(degree: usize, undecided: bool) -> PointClass {
    match degree {
        _ if undecided => PointClass::Undetermined,
        0 => PointClass::Undetermined,
        1 => PointClass::Simple,
        2 => PointClass::Regular,
        _ => PointClass::Singular,
    }
}

/// Fiber of `g^∞` for `g = w·t^m`, `m ≠ 0`.
pub fn fiber_report(
    mt: &MappingTorus,
    g: &MappingTorusElement,
    langs: &Languages,
    cfg: &AnalysisConfig,
) -> Result<FiberReport, FiberError> {
    if g.m == 0 {
        return Err(FiberError::ZeroExponent(g.to_string()));
    }
    if g.m < 0 && !mt.phi().has_inverse() {
        return Err(FiberError::NoInverse);
    }
    let psi = Arc::new(mt.conjugation_automorphism(g)?);
    let found = attracting_rays(&psi, &AttractorParams::from_config(cfg))?;
    let rays = found.rays;
    let (own, opposite) = langs.for_sign(g.m);
    let k = cfg.depth;
    let wparams = cfg.window_params();
    let partition: Partition = diag_components(&rays, own, k, cfg.slack, &wparams)?;

    let consistent: Vec<(usize, usize)> = partition
        .pairs
        .iter()
        .filter(|p| p.outcome == PairOutcome::Consistent)
        .map(|p| (p.i, p.j))
        .collect();
    let certified = own.is_stabilized() && opposite.is_stabilized();
    let rechecks: Vec<Result<LeafVerdict, LaminationError>> = consistent
        .par_iter()
        .map(|&(i, j)| leaf_test(opposite, &rays[i], &rays[j], k, cfg.slack, &wparams))
        .collect();
    let violations = consistent
        .iter()
        .zip(&rechecks)
        .filter(|(_, v)| certified && matches!(v, Ok(LeafVerdict::Consistent { .. })))
        .map(|(&(i, j), _)| CrossViolation { i, j })
        .collect();

    let undecided_pairs: Vec<(usize, usize, String)> = partition
        .undecided()
        .map(|p| match &p.outcome {
            PairOutcome::Undecided { reason } => (p.i, p.j, reason.clone()),
            _ => unreachable!(),
        })
        .collect();
    let degree = partition.largest();
    let class = classify(degree, !undecided_pairs.is_empty());
    let point_type = match class {
        PointClass::Regular | PointClass::Singular if g.m > 0 => PointType::Phi,
        PointClass::Regular | PointClass::Singular => PointType::PhiInverse,
        _ => PointType::NotApplicable,
    };
    let thresholds = Thresholds::for_rank(mt.rank());
    let window = 2 * (k + cfg.slack);
    let ray_prefixes = rays
        .iter()
        .map(|r| r.prefix(window).map(|p| p.to_string()).unwrap_or_else(|e| format!("?{e}")))
        .collect();
    Ok(FiberReport {
        element: g.clone(),
        ray_prefixes,
        ray_tags: rays.iter().map(Ray::tag).collect(),
        partition: partition.components,
        degree_lower_bound: degree,
        class,
        point_type,
        depth: k,
        stabilized: own.is_stabilized(),
        exhaustive_at_bounds: certified && undecided_pairs.is_empty() && !found.fallback,
        undecided_pairs,
        cross_check: CrossCheck { tested: consistent.len(), certified, violations },
        degree_within_bound: degree <= thresholds.two_n,
        bounds: ReportBounds { thresholds, sigma_found: None },
        config: cfg.clone(),
        rays,
    })
}

/// Rays tested against `w^∞` in [`simple_point_check`].
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub rays: Vec<Ray>,
}

impl CandidatePool {
    /// Periodic rays `v^∞` with `|v| ≤ 2` and attracting rays of `u·t^{±1}`
    /// with `|u| ≤ 1`.
    pub fn build(mt: &MappingTorus, cfg: &AnalysisConfig) -> Result<CandidatePool, FiberError> {
        let basis = mt.phi().basis().clone();
        let mut rays: Vec<Ray> = basis
            .ball(2)
            .into_iter()
            .filter(|v| !v.is_identity())
            .map(|v| Ray::power_of(&v).expect("nontrivial"))
            .collect();
        let signs: &[i64] = if mt.phi().has_inverse() { &[1, -1] } else { &[1] };
        let elements: Vec<MappingTorusElement> = basis
            .ball(1)
            .into_iter()
            .flat_map(|u| signs.iter().map(move |&m| MappingTorusElement::new(u.clone(), m)))
            .collect();
        let params = AttractorParams::from_config(cfg);
        let attracting: Vec<Result<AttractingRays, AutError>> = elements
            .par_iter()
            .map(|g| attracting_rays(&Arc::new(mt.conjugation_automorphism(g)?), &params))
            .collect();
        for a in attracting {
            rays.extend(a?.rays);
        }
        Ok(CandidatePool { rays })
    }

    pub fn empty() -> CandidatePool {
        CandidatePool { rays: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Undecided,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplePointReport {
    pub w: ReducedWord,
    pub verdict: Verdict,
    pub candidates_tested: usize,
    pub excluded_equal_or_undecided: usize,
    /// Tags of candidates consistent with `w^∞` in a stabilized language.
    pub identified_with: Vec<String>,
    pub undecided: Vec<String>,
    pub warnings: Vec<String>,
    pub config: AnalysisConfig,
}

/// Checks that no pool ray, nor a short translate `u·w^∞` or `w^{-∞}`, forms
/// a leaf with `w^∞` in either language.
pub fn simple_point_check(
    w: &ReducedWord,
    langs: &Languages,
    pool: &CandidatePool,
    cfg: &AnalysisConfig,
) -> Result<SimplePointReport, FiberError> {
    let x = Ray::power_of(w).map_err(|e| FiberError::Aut(AutError::Word(e)))?;
    let mut candidates = pool.rays.clone();
    candidates.push(Ray::power_of(&w.inverse()).expect("nontrivial"));
    for code in 0..2 * langs.rank {
        candidates.push(x.translate(&ReducedWord::letter(Letter::from_code(code))));
    }
    let mut warnings = Vec::new();
    if pool.rays.is_empty() {
        warnings.push("candidate pool is empty".to_string());
    }
    let probe = cfg.probe;
    let distinct: Vec<&Ray> = candidates.iter().filter(|c| x.compare(c, probe) == RayEq::DistinctCertified).collect();
    let excluded = candidates.len() - distinct.len();
    let wparams = cfg.window_params();
    let results: Vec<(String, Vec<Result<LeafVerdict, LaminationError>>)> = distinct
        .par_iter()
        .map(|c| {
            let tests = [&langs.phi, &langs.phi_inverse]
                .iter()
                .map(|l| leaf_test(l, &x, c, cfg.depth, cfg.slack, &wparams))
                .collect();
            (c.tag(), tests)
        })
        .collect();
    let mut identified = Vec::new();
    let mut undecided = Vec::new();
    for (tag, tests) in results {
        for (lang, t) in [&langs.phi, &langs.phi_inverse].iter().zip(tests) {
            match t {
                Ok(LeafVerdict::No { .. }) => {}
                Ok(LeafVerdict::Consistent { .. }) if lang.is_stabilized() => identified.push(tag.clone()),
                Ok(LeafVerdict::Consistent { .. }) => undecided.push(format!("{tag}: language not stabilized")),
                Err(e) => undecided.push(format!("{tag}: {e}")),
            }
        }
    }
    let verdict = if !identified.is_empty() {
        Verdict::Fail
    } else if !undecided.is_empty() {
        Verdict::Undecided
    } else {
        Verdict::Pass
    };
    Ok(SimplePointReport {
        w: w.clone(),
        verdict,
        candidates_tested: distinct.len(),
        excluded_equal_or_undecided: excluded,
        identified_with: identified,
        undecided,
        warnings,
        config: cfg.clone(),
    })
}

/// Degrees of `g^∞` and `g^{-∞}` and the pairwise bound.
#[derive(Debug, Clone, Serialize)]
pub struct PairDegreeCheck {
    pub element: MappingTorusElement,
    pub inverse: MappingTorusElement,
    pub degree_forward: usize,
    pub degree_backward: usize,
    pub sum: usize,
    pub four_n_minus_1: usize,
    pub sum_within_bound: bool,
    /// False only when both points are singular of the same type.
    pub types_differ: bool,
}

pub fn pair_degree_check(forward: &FiberReport, backward: &FiberReport, rank: usize) -> PairDegreeCheck {
    let sum = forward.degree_lower_bound + backward.degree_lower_bound;
    let limit = Thresholds::for_rank(rank).four_n_minus_1;
    let both_singular = forward.class == PointClass::Singular && backward.class == PointClass::Singular;
    PairDegreeCheck {
        element: forward.element.clone(),
        inverse: backward.element.clone(),
        degree_forward: forward.degree_lower_bound,
        degree_backward: backward.degree_lower_bound,
        sum,
        four_n_minus_1: limit,
        sum_within_bound: sum <= limit,
        types_differ: !both_singular || forward.point_type != backward.point_type,
    }
}

/// Runs [`fiber_report`] on `g` and `g⁻¹` and checks the pairwise bound.
pub fn pair_reports(
    mt: &MappingTorus,
    g: &MappingTorusElement,
    langs: &Languages,
    cfg: &AnalysisConfig,
) -> Result<(FiberReport, FiberReport, PairDegreeCheck), FiberError> {
    let forward = fiber_report(mt, g, langs, cfg)?;
    let backward = fiber_report(mt, &mt.inverse(g)?, langs, cfg)?;
    let check = pair_degree_check(&forward, &backward, mt.rank());
    Ok((forward, backward, check))
}

/// Singular points in one `F_N`-orbit, found through `F_N`-conjugate
/// candidates.
#[derive(Debug, Clone, Serialize)]
pub struct Family {
    pub representative: FiberReport,
    pub members: Vec<MappingTorusElement>,
    pub degree: usize,
    #[serde(rename = "type")]
    pub point_type: PointType,
    pub pair: PairDegreeCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsCheck {
    pub n: usize,
    #[serde(flatten)]
    pub thresholds: Thresholds,
    pub sigma_found: usize,
    pub max_degree: usize,
    pub degree_within_bound: bool,
    pub phi_type_sum: usize,
    pub phi_inverse_type_sum: usize,
    pub type_sums_within_bound: bool,
    pub phi_type_orbits: usize,
    pub phi_inverse_type_orbits: usize,
    pub orbit_counts_within_bound: bool,
    pub sigma_within_bound: bool,
    pub pair_sums_within_bound: bool,
    pub pair_types_differ: bool,
    pub cross_check_violations: usize,
    /// At least two singular orbits were found (expected, not asserted).
    pub expectation_two_orbits: bool,
}

impl BoundsCheck {
    pub fn from_reports(n: usize, all: &[FiberReport], families: &[Family]) -> Self {
        let t = Thresholds::for_rank(n);
        let of_type = |ty: PointType| families.iter().filter(move |f| f.point_type == ty);
        let sum = |ty| of_type(ty).map(|f| f.degree.saturating_sub(2)).sum::<usize>();
        let max_degree = all.iter().map(|r| r.degree_lower_bound).max().unwrap_or(0);
        let (phi_sum, inv_sum) = (sum(PointType::Phi), sum(PointType::PhiInverse));
        let (phi_orbits, inv_orbits) = (of_type(PointType::Phi).count(), of_type(PointType::PhiInverse).count());
        BoundsCheck {
            n,
            thresholds: t,
            sigma_found: families.len(),
            max_degree,
            degree_within_bound: max_degree <= t.two_n,
            phi_type_sum: phi_sum,
            phi_inverse_type_sum: inv_sum,
            type_sums_within_bound: phi_sum <= t.two_n_minus_2 && inv_sum <= t.two_n_minus_2,
            phi_type_orbits: phi_orbits,
            phi_inverse_type_orbits: inv_orbits,
            orbit_counts_within_bound: phi_orbits <= t.two_n_minus_2 && inv_orbits <= t.two_n_minus_2,
            sigma_within_bound: families.len() <= t.four_n_minus_5,
            pair_sums_within_bound: families.iter().all(|f| f.pair.sum_within_bound),
            pair_types_differ: families.iter().all(|f| f.pair.types_differ),
            cross_check_violations: all.iter().map(|r| r.cross_check.violations.len()).sum(),
            expectation_two_orbits: families.len() >= 2,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.degree_within_bound
            && self.type_sums_within_bound
            && self.orbit_counts_within_bound
            && self.sigma_within_bound
            && self.pair_sums_within_bound
            && self.pair_types_differ
            && self.cross_check_violations == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub candidates: Vec<MappingTorusElement>,
    pub skipped_proper_powers: Vec<MappingTorusElement>,
    pub undetermined: Vec<MappingTorusElement>,
    pub families: Vec<Family>,
    pub bounds: BoundsCheck,
    pub notes: Vec<String>,
    pub config: AnalysisConfig,
    #[serde(skip)]
    pub reports: Vec<FiberReport>,
}

/// Enumerates `g = w·t^m` with `|w| ≤ word_radius`, `1 ≤ |m| ≤ exp_max`,
/// skips proper powers, and groups singular fibers into `F_N`-orbit families
/// by conjugators of length `≤ word_radius + 2`.
pub fn singular_search(mt: &MappingTorus, langs: &Languages, cfg: &AnalysisConfig) -> Result<SearchResult, FiberError> {
    let r = cfg.word_radius;
    let exps: Vec<i64> = (1..=cfg.exp_max as i64)
        .flat_map(|m| if mt.phi().has_inverse() { vec![m, -m] } else { vec![m] })
        .collect();
    let mut all: Vec<MappingTorusElement> = mt
        .phi()
        .basis()
        .ball(r)
        .into_iter()
        .flat_map(|w| exps.iter().map(move |&m| MappingTorusElement::new(w.clone(), m)))
        .collect();
    all.sort();
    let mut candidates = Vec::new();
    let mut skipped = Vec::new();
    for g in all {
        if mt.is_proper_power(&g, r)? {
            skipped.push(g);
        } else {
            candidates.push(g);
        }
    }
    let reports: Vec<FiberReport> = candidates
        .par_iter()
        .map(|g| fiber_report(mt, g, langs, cfg))
        .collect::<Result<_, _>>()?;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, rep) in reports.iter().enumerate() {
        if rep.class != PointClass::Singular {
            continue;
        }
        let mut placed = false;
        for group in groups.iter_mut() {
            let head = &reports[group[0]].element;
            if mt.conjugator_search(head, &rep.element, r + 2, 0)?.is_some() {
                group.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(vec![i]);
        }
    }
    let pairs: Vec<Result<PairDegreeCheck, FiberError>> = groups
        .par_iter()
        .map(|group| {
            let rep = &reports[group[0]];
            let back = fiber_report(mt, &mt.inverse(&rep.element)?, langs, cfg)?;
            Ok(pair_degree_check(rep, &back, mt.rank()))
        })
        .collect();
    let mut families = Vec::new();
    for (group, pair) in groups.iter().zip(pairs) {
        let rep = reports[group[0]].clone();
        families.push(Family {
            degree: group.iter().map(|&i| reports[i].degree_lower_bound).max().unwrap_or(0),
            point_type: rep.point_type,
            members: group.iter().map(|&i| reports[i].element.clone()).collect(),
            representative: rep,
            pair: pair?,
        });
    }
    let mut bounds = BoundsCheck::from_reports(mt.rank(), &reports, &families);
    bounds.sigma_found = families.len();
    let mut notes = Vec::new();
    if families.is_empty() {
        notes.push("no witnesses at bounds".to_string());
    } else if !bounds.expectation_two_orbits {
        notes.push("fewer than two singular orbits found at these bounds".to_string());
    }
    for f in &families {
        let degrees: BTreeSet<usize> = f
            .members
            .iter()
            .filter_map(|m| reports.iter().find(|r| &r.element == m))
            .map(|r| r.degree_lower_bound)
            .collect();
        if degrees.len() > 1 {
            notes.push(format!("family of {} has unequal degree bounds {degrees:?}", f.members[0]));
        }
    }
    let undetermined = reports.iter().filter(|r| r.class == PointClass::Undetermined).map(|r| r.element.clone()).collect();
    Ok(SearchResult {
        candidates,
        skipped_proper_powers: skipped,
        undetermined,
        families,
        bounds,
        notes,
        config: cfg.clone(),
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Basis;

    fn w(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn tribonacci() -> Automorphism {
        let b = Basis::new(3).unwrap();
        Automorphism::new(b, vec![w("ab"), w("ac"), w("a")], Some(vec![w("c"), w("Ca"), w("Cb")])).unwrap()
    }

    fn prefixes(rays: &[Ray], n: usize) -> Vec<String> {
        rays.iter().map(|r| r.prefix(n).unwrap().to_string()).collect()
    }

    #[test]
    fn tribonacci_fixed_ray() {
        let psi = Arc::new(tribonacci());
        let found = attracting_rays(&psi, &AttractorParams::new(1, 40)).unwrap();
        assert_eq!(prefixes(&found.rays, 13), vec!["abacabaabacab"]);
        assert!(!found.fallback);
    }

    #[test]
    fn inner_automorphism_rays() {
        let b = Basis::new(3).unwrap();
        let psi = Arc::new(Automorphism::inner(b, &w("a")));
        let found = attracting_rays(&psi, &AttractorParams::new(2, 24)).unwrap();
        let p = prefixes(&found.rays, 10);
        assert!(p.contains(&"aaaaaaaaaa".to_string()));
        assert!(found.rays.iter().all(|r| {
            let s = r.prefix(10).unwrap();
            s.letters().iter().skip(2).all(|l| l.generator() == 0)
        }));
    }

    #[test]
    fn identity_falls_back() {
        let psi = Arc::new(Automorphism::identity(Basis::new(2).unwrap()));
        let found = attracting_rays(&psi, &AttractorParams::new(2, 16)).unwrap();
        assert!(found.fallback);
        assert_eq!(found.rays.iter().map(Ray::tag).collect::<Vec<_>>(), vec!["(a)^inf", "(A)^inf", "(b)^inf", "(B)^inf"]);
    }

    #[test]
    fn thresholds_rank_three() {
        let t = Thresholds::for_rank(3);
        assert_eq!((t.two_n, t.two_n_minus_2, t.four_n_minus_5, t.four_n_minus_1), (6, 4, 7, 11));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(1, false), PointClass::Simple);
        assert_eq!(classify(2, false), PointClass::Regular);
        assert_eq!(classify(4, false), PointClass::Singular);
        assert_eq!(classify(4, true), PointClass::Undetermined);
        assert_eq!(classify(0, false), PointClass::Undetermined);
    }

    #[test]
    fn zero_exponent_is_rejected() {
        let mt = MappingTorus::new(tribonacci());
        let cfg = AnalysisConfig::default();
        let langs = Languages::build(mt.phi(), &cfg).unwrap();
        let g = MappingTorusElement::new(w("a"), 0);
        assert!(matches!(fiber_report(&mt, &g, &langs, &cfg), Err(FiberError::ZeroExponent(_))));
    }
}
