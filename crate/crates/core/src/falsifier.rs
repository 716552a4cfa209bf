//! Empirical identifiability falsifier.
//!
//! A random tensor of the expected generic rank is synthesized with a
//! known (planted) decomposition, then attacked from many random starts
//! with Levenberg-Marquardt over the complex numbers. Each successful fit
//! is canonicalized (unit-norm factor points, phase fixed by making the
//! largest-modulus coordinate real positive, scale absorbed into the
//! weight) and the survivors are clustered up to term permutation. Two or
//! more well-separated classes witness non-identifiability of that tensor;
//! a single class containing the planted decomposition is the expected
//! picture for identifiable formats.
//!
//! The search runs over the complex field throughout: a real search can
//! miss complex decompositions.

mod lm;

use crate::classifier::{rank_profile, SVSpec};
use crate::embedding::{coordinate_basis, eval_basis};
use crate::exec::{self, Parallelism};
use crate::seed::derive_seed;
use crate::terracini::ambient_count;
use crate::{Error, Result};
use num::complex::Complex64;
use num::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Serialize, Serializer};

fn serialize_complex<S: Serializer>(c: &Complex64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq([c.re, c.im])
}

fn serialize_point_lists<S: Serializer>(
    points: &[Vec<Complex64>],
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(
        points.iter().map(|p| p.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()),
    )
}

/// One weighted rank-one term: a weight and one point per factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    #[serde(serialize_with = "serialize_complex")]
    pub weight: Complex64,
    #[serde(serialize_with = "serialize_point_lists")]
    pub points: Vec<Vec<Complex64>>,
}

/// A canonicalized weighted sum of rank-one terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub terms: Vec<Term>,
}

/// Knobs of the multi-start search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub starts: usize,
    pub max_iter: usize,
    /// Relative residual below which a fit counts as a decomposition.
    pub residual_tol: f64,
    /// Distance below which two canonicalized decompositions are the same.
    pub match_tol: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { starts: 64, max_iter: 200, residual_tol: 1e-10, match_tol: 1e-6, seed: 0 }
    }
}

/// Verdict of the empirical search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvidenceVerdict {
    /// At least two well-separated decomposition classes were found.
    NonIdentifiableEvidence,
    /// Every successful fit landed in a single class.
    NoCounterexampleFound,
}

/// Outcome of [`identifiability_evidence`].
#[derive(Debug, Clone, Serialize)]
pub struct EvidenceReport {
    pub spec: SVSpec,
    #[serde(rename = "g")]
    pub rank: usize,
    /// Number of decomposition classes, counted only when representatives
    /// are separated by more than ten times the match tolerance.
    pub classes_found: usize,
    pub representatives: Vec<Decomposition>,
    /// Matched distances between class representatives.
    pub representative_distances: Vec<Vec<f64>>,
    pub planted_recovered: bool,
    /// Independently re-verified relative residuals of the successful
    /// fits, in start order.
    pub residuals: Vec<f64>,
    pub verdict: EvidenceVerdict,
    /// Fewer than two starts converged: the run is inconclusive.
    pub degenerate: bool,
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn random_terms(spec: &SVSpec, rank: usize, rng: &mut ChaCha8Rng) -> Vec<lm::RawTerm> {
    (0..rank)
        .map(|_| {
            let weight = complex_gaussian(rng);
            let points: Vec<Vec<Complex64>> = spec
                .n()
                .iter()
                .map(|&n| (0..=n as usize).map(|_| complex_gaussian(rng)).collect())
                .collect();
            (weight, points)
        })
        .collect()
}

fn complex_pow(base: Complex64, exp: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

fn canonicalize_term(spec: &SVSpec, weight: Complex64, points: &[Vec<Complex64>]) -> Term {
    let mut canonical_weight = weight;
    let mut canonical_points = Vec::with_capacity(points.len());
    for (point, &degree) in points.iter().zip(spec.d()) {
        let norm = point.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            canonical_points.push(point.clone());
            continue;
        }
        let lead = point
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.norm().total_cmp(&b.norm()).then(j.cmp(i)))
            .map(|(_, c)| *c)
            .expect("factor points are nonempty");
        let phase = if lead.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { lead / lead.norm() };
        let scale = phase * norm;
        canonical_points.push(point.iter().map(|c| c / scale).collect());
        canonical_weight *= complex_pow(scale, degree);
    }
    Term { weight: canonical_weight, points: canonical_points }
}

fn term_sort_key(term: &Term) -> Vec<f64> {
    let mut key = Vec::new();
    for point in &term.points {
        for c in point {
            key.push(c.re);
            key.push(c.im);
        }
    }
    key.push(term.weight.re);
    key.push(term.weight.im);
    key
}

/// Reduces a raw weighted expansion to its canonical representative.
pub fn canonicalize(spec: &SVSpec, terms: &[(Complex64, Vec<Vec<Complex64>>)]) -> Decomposition {
    let mut canonical: Vec<Term> = terms
        .iter()
        .map(|(weight, points)| canonicalize_term(spec, *weight, points))
        .collect();
    canonical.sort_by(|a, b| {
        let (ka, kb) = (term_sort_key(a), term_sort_key(b));
        ka.iter()
            .zip(&kb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Decomposition { terms: canonical }
}

/// Distance between two canonicalized terms: the largest factor-point
/// distance, or the relative weight distance if that is larger.
fn term_distance(a: &Term, b: &Term) -> f64 {
    let mut dist: f64 = 0.0;
    for (p, q) in a.points.iter().zip(&b.points) {
        let d = p.iter().zip(q).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        dist = dist.max(d);
    }
    let weight_scale = a.weight.norm().max(b.weight.norm()).max(1e-300);
    dist.max((a.weight - b.weight).norm() / weight_scale)
}

fn has_perfect_matching(allowed: &[Vec<bool>]) -> bool {
    let g = allowed.len();
    let mut matched: Vec<Option<usize>> = vec![None; g];

    fn augment(
        u: usize,
        allowed: &[Vec<bool>],
        visited: &mut [bool],
        matched: &mut [Option<usize>],
    ) -> bool {
        for v in 0..allowed.len() {
            if allowed[u][v] && !visited[v] {
                visited[v] = true;
                if matched[v].is_none()
                    || augment(matched[v].unwrap(), allowed, visited, matched)
                {
                    matched[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }

    for u in 0..g {
        let mut visited = vec![false; g];
        if !augment(u, allowed, &mut visited, &mut matched) {
            return false;
        }
    }
    true
}

/// Bottleneck matching distance between two decompositions: the smallest
/// threshold t admitting a term-to-term bijection with every matched pair
/// within t. Infinite when the term counts differ.
pub fn matched_distance(a: &Decomposition, b: &Decomposition) -> f64 {
    if a.terms.len() != b.terms.len() {
        return f64::INFINITY;
    }
    let g = a.terms.len();
    if g == 0 {
        return 0.0;
    }
    let dist: Vec<Vec<f64>> = a
        .terms
        .iter()
        .map(|ta| b.terms.iter().map(|tb| term_distance(ta, tb)).collect())
        .collect();
    let mut thresholds: Vec<f64> = dist.iter().flatten().cloned().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let feasible = |t: f64| {
        let allowed: Vec<Vec<bool>> =
            dist.iter().map(|row| row.iter().map(|&d| d <= t).collect()).collect();
        has_perfect_matching(&allowed)
    };
    let mut lo = 0;
    let mut hi = thresholds.len() - 1;
    if !feasible(thresholds[hi]) {
        return f64::INFINITY;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    thresholds[lo]
}

/// Grouping of fitted decompositions into equivalence classes.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    /// Indices into the input list, one sorted vector per class, ordered
    /// by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// The smallest index of each class.
    pub representatives: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn classes(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let root = self.find(i);
            map.entry(root).or_default().push(i);
        }
        map.into_values().collect()
    }
}

/// Clusters decompositions of a common tensor up to term permutation.
///
/// Two fits are equivalent when their matched distance is at most
/// `match_tol`. Classes whose representatives sit closer than ten times
/// the tolerance are then merged, so `classes >= 2` always means two
/// well-separated decompositions rather than a tolerance-boundary split.
pub fn cluster(decs: &[Decomposition], match_tol: f64) -> ClusterOutcome {
    let n = decs.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if matched_distance(&decs[i], &decs[j]) <= match_tol {
                uf.union(i, j);
            }
        }
    }
    let coarse = uf.classes(n);
    let reps: Vec<usize> = coarse.iter().map(|c| c[0]).collect();
    let mut merge = UnionFind::new(n);
    for class in &coarse {
        for pair in class.windows(2) {
            merge.union(pair[0], pair[1]);
        }
    }
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            if matched_distance(&decs[reps[i]], &decs[reps[j]]) <= 10.0 * match_tol {
                merge.union(reps[i], reps[j]);
            }
        }
    }
    let classes = merge.classes(n);
    let representatives = classes.iter().map(|c| c[0]).collect();
    ClusterOutcome { classes, representatives }
}

/// Draws a random rank-`rank` tensor together with its planted
/// decomposition.
pub fn synthesize(
    spec: &SVSpec,
    rank: usize,
    seed: u64,
) -> Result<(Vec<Complex64>, Decomposition)> {
    ambient_count(spec)?;
    let basis = coordinate_basis(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = random_terms(spec, rank, &mut rng);
    let mut tensor = vec![Complex64::zero(); basis.len()];
    for (weight, points) in &terms {
        let image = eval_basis(&basis, points);
        for (acc, e) in tensor.iter_mut().zip(image) {
            *acc += weight * e;
        }
    }
    Ok((tensor, canonicalize(spec, &terms)))
}

/// Relative residual of a decomposition against a target tensor,
/// recomputed from scratch (independent of any optimizer bookkeeping).
pub fn relative_residual(spec: &SVSpec, dec: &Decomposition, tensor: &[Complex64]) -> f64 {
    let basis = coordinate_basis(spec);
    let mut acc = vec![Complex64::zero(); tensor.len()];
    for term in &dec.terms {
        let image = eval_basis(&basis, &term.points);
        for (a, e) in acc.iter_mut().zip(image) {
            *a += term.weight * e;
        }
    }
    let err: f64 =
        acc.iter().zip(tensor).map(|(a, t)| (a - t).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = tensor.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    err / scale.max(1e-300)
}

fn tensor_norm(tensor: &[Complex64]) -> f64 {
    tensor.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt()
}

fn fit_terms(
    spec: &SVSpec,
    rank: usize,
    tensor: &[Complex64],
    init: Vec<lm::RawTerm>,
    config: &SearchConfig,
) -> Result<Decomposition> {
    let norm = tensor_norm(tensor);
    if norm == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let basis = coordinate_basis(spec);
    let problem = lm::Problem {
        spec,
        basis: &basis,
        rank,
        target: tensor,
        target_norm: norm,
        options: lm::Options { max_iter: config.max_iter, residual_tol: config.residual_tol },
    };
    let solution = lm::minimize(&problem, &init).map_err(Error::SearchFailed)?;
    Ok(canonicalize(spec, &solution))
}

/// One local search from a seeded random start.
pub fn fit(
    spec: &SVSpec,
    rank: usize,
    tensor: &[Complex64],
    start_seed: u64,
    config: &SearchConfig,
) -> Result<Decomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(start_seed);
    let init = random_terms(spec, rank, &mut rng);
    fit_terms(spec, rank, tensor, init, config)
}

/// One local search from explicit initial terms (refinement).
pub fn fit_from(
    spec: &SVSpec,
    tensor: &[Complex64],
    init: &Decomposition,
    config: &SearchConfig,
) -> Result<Decomposition> {
    let raw: Vec<lm::RawTerm> =
        init.terms.iter().map(|t| (t.weight, t.points.clone())).collect();
    fit_terms(spec, init.terms.len(), tensor, raw, config)
}

/// Synthesizes a generic tensor of the expected rank and searches for
/// distinct decompositions from `config.starts` random starts.
pub fn identifiability_evidence(spec: &SVSpec, config: &SearchConfig) -> Result<EvidenceReport> {
    identifiability_evidence_with(Parallelism::Rayon, spec, None, config)
}

/// [`identifiability_evidence`] with an explicit execution strategy and an
/// optional rank override.
pub fn identifiability_evidence_with(
    par: Parallelism,
    spec: &SVSpec,
    rank_override: Option<usize>,
    config: &SearchConfig,
) -> Result<EvidenceReport> {
    let rank = match rank_override {
        Some(r) if r >= 1 => r,
        Some(r) => return Err(Error::InvalidSpec(format!("rank override {r} must be positive"))),
        None => rank_profile(spec).generic_rank_usize()?,
    };
    if rank > 64 {
        return Err(Error::RankTooLarge(rank.to_string()));
    }
    let (tensor, planted) = synthesize(spec, rank, derive_seed(config.seed, &[0]))?;

    let fits: Vec<Option<Decomposition>> = exec::map_indexed(par, config.starts, |j| {
        fit(spec, rank, &tensor, derive_seed(config.seed, &[1, j as u64]), config).ok()
    });

    let mut successes = Vec::new();
    let mut residuals = Vec::new();
    for dec in fits.into_iter().flatten() {
        let residual = relative_residual(spec, &dec, &tensor);
        if residual <= config.residual_tol {
            successes.push(dec);
            residuals.push(residual);
        }
    }

    let degenerate = successes.len() < 2;
    let outcome = cluster(&successes, config.match_tol);
    let representatives: Vec<Decomposition> =
        outcome.representatives.iter().map(|&i| successes[i].clone()).collect();
    let representative_distances: Vec<Vec<f64>> = representatives
        .iter()
        .map(|a| representatives.iter().map(|b| matched_distance(a, b)).collect())
        .collect();
    let planted_recovered =
        successes.iter().any(|dec| matched_distance(dec, &planted) <= config.match_tol);
    let classes_found = outcome.classes.len();
    let verdict = if classes_found >= 2 {
        EvidenceVerdict::NonIdentifiableEvidence
    } else {
        EvidenceVerdict::NoCounterexampleFound
    };
    Ok(EvidenceReport {
        spec: spec.clone(),
        rank,
        classes_found,
        representatives,
        representative_distances,
        planted_recovered,
        residuals,
        verdict,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &[u32], d: &[u32]) -> SVSpec {
        SVSpec::new(n.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn synthesize_rank_one_is_consistent() {
        let s = spec(&[1, 1], &[1, 1]);
        let (tensor, planted) = synthesize(&s, 1, 3).unwrap();
        assert_eq!(planted.terms.len(), 1);
        assert!(relative_residual(&s, &planted, &tensor) <= 1e-12);
    }

    #[test]
    fn synthesize_is_deterministic() {
        let s = spec(&[1, 1], &[3, 5]);
        let (t1, d1) = synthesize(&s, 8, 5).unwrap();
        let (t2, d2) = synthesize(&s, 8, 5).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(d1, d2);
    }

    #[test]
    fn planted_sum_matches_tensor_after_canonicalization() {
        let s = spec(&[1, 2], &[2, 1]);
        let (tensor, planted) = synthesize(&s, 3, 11).unwrap();
        assert!(relative_residual(&s, &planted, &tensor) <= 1e-12);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let s = spec(&[1, 1], &[3, 5]);
        let (_, planted) = synthesize(&s, 4, 9).unwrap();
        let raw: Vec<(Complex64, Vec<Vec<Complex64>>)> =
            planted.terms.iter().map(|t| (t.weight, t.points.clone())).collect();
        let twice = canonicalize(&s, &raw);
        assert!(matched_distance(&planted, &twice) <= 1e-12);
    }

    #[test]
    fn fit_from_planted_converges_immediately() {
        let s = spec(&[1, 1], &[3, 5]);
        let (tensor, planted) = synthesize(&s, 8, 0).unwrap();
        let config = SearchConfig { max_iter: 3, ..Default::default() };
        let refined = fit_from(&s, &tensor, &planted, &config).unwrap();
        assert!(matched_distance(&refined, &planted) <= 1e-8);
    }

    #[test]
    fn fit_rejects_zero_tensor() {
        let s = spec(&[1, 1], &[1, 1]);
        let zero = vec![Complex64::zero(); 4];
        assert!(matches!(
            fit(&s, 2, &zero, 0, &SearchConfig::default()),
            Err(Error::ZeroTensor)
        ));
    }

    #[test]
    fn generic_matrix_fits_succeed() {
        // rank-2 decompositions of a generic 2x2 matrix: every start of a
        // well-posed problem should converge
        let s = spec(&[1, 1], &[1, 1]);
        let (tensor, _) = synthesize(&s, 2, 1).unwrap();
        let config = SearchConfig::default();
        let mut successes = 0;
        for j in 0..8 {
            if let Ok(dec) = fit(&s, 2, &tensor, derive_seed(1, &[1, j]), &config) {
                assert!(relative_residual(&s, &dec, &tensor) <= config.residual_tol);
                successes += 1;
            }
        }
        assert!(successes >= 2);
    }

    #[test]
    fn cluster_duplicates_and_permutations() {
        let s = spec(&[1, 1], &[1, 1]);
        let (_, planted) = synthesize(&s, 3, 7).unwrap();
        let mut permuted = planted.clone();
        permuted.terms.rotate_left(1);
        // canonical sorting makes the rotation cosmetic, but go through the
        // full matching anyway
        let outcome = cluster(&[planted.clone(), planted.clone(), permuted], 1e-6);
        assert_eq!(outcome.classes.len(), 1);
        assert_eq!(outcome.classes[0], vec![0, 1, 2]);
    }

    #[test]
    fn matrix_decompositions_are_non_unique() {
        // 2x2 matrices of rank 2: a continuum of decompositions
        let s = spec(&[1, 1], &[1, 1]);
        let config = SearchConfig { starts: 16, ..Default::default() };
        let report = identifiability_evidence(&s, &config).unwrap();
        assert!(report.classes_found >= 2);
        assert_eq!(report.verdict, EvidenceVerdict::NonIdentifiableEvidence);
    }

    #[test]
    fn rank_one_is_unique() {
        let s = spec(&[1, 1], &[2, 2]);
        let config = SearchConfig { starts: 8, ..Default::default() };
        let report =
            identifiability_evidence_with(Parallelism::Rayon, &s, Some(1), &config).unwrap();
        assert_eq!(report.classes_found, 1);
        assert!(report.planted_recovered);
        assert_eq!(report.verdict, EvidenceVerdict::NoCounterexampleFound);
    }

    #[test]
    fn evidence_is_seed_deterministic() {
        let s = spec(&[1, 1], &[1, 1]);
        let config = SearchConfig { starts: 6, ..Default::default() };
        let a = identifiability_evidence(&s, &config).unwrap();
        let b = identifiability_evidence(&s, &config).unwrap();
        assert_eq!(a.classes_found, b.classes_found);
        assert_eq!(a.residuals, b.residuals);
        assert_eq!(a.representatives, b.representatives);
    }
}
