//! Integer and rational numerology of a Segre-Veronese format, and the
//! sufficient criterion for generic non-identifiability.
//!
//! Everything here is pure arithmetic on the multi-indices `(n, d)`: the
//! ambient dimension, the expected generic rank, perfection, and the
//! criterion's two hypotheses together with the NEF margins produced by
//! the slope of the steepest factor. Products of binomials overflow a
//! machine word quickly on grid scans, so counts are kept in arbitrary
//! precision throughout.

use crate::exec::{self, Parallelism};
use crate::{Error, Result};
use num::bigint::BigInt;
use num::integer::binomial;
use num::rational::Ratio;
use num::{One, Signed, Zero};
use serde::{Serialize, Serializer};

/// A Segre-Veronese format: `r` factors with projective dimensions `n_i`
/// and degrees `d_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SVSpec {
    n: Vec<u32>,
    d: Vec<u32>,
}

impl SVSpec {
    /// Validates and builds a format. Both lists must be nonempty, of equal
    /// length, with every entry at least 1.
    pub fn new(n: Vec<u32>, d: Vec<u32>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::InvalidSpec("at least one factor is required".into()));
        }
        if n.len() != d.len() {
            return Err(Error::InvalidSpec(format!(
                "{} projective dimensions but {} degrees",
                n.len(),
                d.len()
            )));
        }
        if n.iter().any(|&v| v == 0) {
            return Err(Error::InvalidSpec("every n_i must be at least 1".into()));
        }
        if d.iter().any(|&v| v == 0) {
            return Err(Error::InvalidSpec("every d_i must be at least 1".into()));
        }
        Ok(Self { n, d })
    }

    pub fn factors(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn d(&self) -> &[u32] {
        &self.d
    }

    /// dim X = sum of the factor dimensions.
    pub fn dim(&self) -> usize {
        self.n.iter().map(|&v| v as usize).sum()
    }

    /// Number of ambient coordinates, `N + 1 = prod C(n_i + d_i, n_i)`.
    pub fn coordinate_count(&self) -> BigInt {
        let mut count = BigInt::one();
        for (&n, &d) in self.n.iter().zip(&self.d) {
            count *= binomial(BigInt::from(n + d), BigInt::from(n));
        }
        count
    }
}

impl std::fmt::Display for SVSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "n=({}) d=({})", join(&self.n), join(&self.d))
    }
}

fn serialize_bigint<S: Serializer>(v: &BigInt, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&v.to_string())
}

fn serialize_ratio<S: Serializer>(v: &Ratio<i64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&v.to_string())
}

fn serialize_ratio_vec<S: Serializer>(
    v: &[Ratio<i64>],
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(v.iter().map(|r| r.to_string()))
}

/// Derived numerology of a format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankProfile {
    /// N, with N + 1 ambient coordinates.
    #[serde(serialize_with = "serialize_bigint")]
    pub ambient_dim: BigInt,
    /// dim X.
    pub variety_dim: usize,
    /// Expected generic rank g = ceil((N+1)/(dim X + 1)).
    #[serde(serialize_with = "serialize_bigint")]
    pub generic_rank: BigInt,
    /// Whether dim X + 1 divides N + 1.
    pub perfect: bool,
}

impl RankProfile {
    /// The generic rank as a machine integer, when desk-scale.
    pub fn generic_rank_usize(&self) -> Result<usize> {
        use num::ToPrimitive;
        self.generic_rank
            .to_usize()
            .filter(|&g| g <= 4096)
            .ok_or_else(|| Error::RankTooLarge(self.generic_rank.to_string()))
    }
}

/// Verdict of the non-identifiability criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NotIdentifiableByTheorem,
    Inconclusive,
}

/// Evaluation of the criterion's hypotheses on one format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    /// All d_i > n_i + 1, strictly.
    pub degree_hypothesis: bool,
    /// g > 2 dim X.
    pub rank_hypothesis: bool,
    /// 1-based factor index maximizing (n_i+1)/d_i (smallest on ties).
    pub pivot: usize,
    /// a = d_pivot / (n_pivot + 1); exceeds 1 whenever the degree
    /// hypothesis holds.
    #[serde(serialize_with = "serialize_ratio")]
    pub slope_a: Ratio<i64>,
    /// -(n_i+1) + (n_pivot+1) d_i / d_pivot per factor; the pivot's margin
    /// is exactly zero and all others are nonnegative.
    #[serde(serialize_with = "serialize_ratio_vec")]
    pub nef_margins: Vec<Ratio<i64>>,
    pub verdict: Verdict,
}

/// Computes N, dim X, the generic rank and perfection.
pub fn rank_profile(spec: &SVSpec) -> RankProfile {
    let count = spec.coordinate_count();
    let dim = spec.dim();
    let cells = BigInt::from(dim + 1);
    let generic_rank = (&count + &cells - BigInt::one()) / &cells;
    let perfect = (&count % &cells).is_zero();
    RankProfile {
        ambient_dim: count - BigInt::one(),
        variety_dim: dim,
        generic_rank,
        perfect,
    }
}

/// Evaluates the non-identifiability criterion.
pub fn criterion(spec: &SVSpec) -> CriterionReport {
    let profile = rank_profile(spec);
    let degree_hypothesis = spec.n.iter().zip(&spec.d).all(|(&n, &d)| d > n + 1);
    let rank_hypothesis = profile.generic_rank > BigInt::from(2 * profile.variety_dim);

    // (n_i+1)/d_i compared by cross-multiplication; first maximum wins.
    let mut pivot = 0usize;
    for i in 1..spec.factors() {
        let lhs = (spec.n[i] as i64 + 1) * spec.d[pivot] as i64;
        let rhs = (spec.n[pivot] as i64 + 1) * spec.d[i] as i64;
        if lhs > rhs {
            pivot = i;
        }
    }
    let np1 = spec.n[pivot] as i64 + 1;
    let dp = spec.d[pivot] as i64;
    let slope_a = Ratio::new(dp, np1);
    let nef_margins: Vec<Ratio<i64>> = spec
        .n
        .iter()
        .zip(&spec.d)
        .map(|(&n, &d)| Ratio::new(np1 * d as i64, dp) - Ratio::from_integer(n as i64 + 1))
        .collect();
    debug_assert!(nef_margins[pivot].is_zero());
    debug_assert!(nef_margins.iter().all(|m| !m.is_negative()));

    let verdict = if degree_hypothesis && rank_hypothesis {
        Verdict::NotIdentifiableByTheorem
    } else {
        Verdict::Inconclusive
    };
    CriterionReport {
        degree_hypothesis,
        rank_hypothesis,
        pivot: pivot + 1,
        slope_a,
        nef_margins,
        verdict,
    }
}

/// One row of a grid scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub spec: SVSpec,
    pub profile: RankProfile,
    pub criterion: CriterionReport,
}

/// Enumerates every canonical format within the bounds and classifies it.
///
/// Factors are kept sorted by `(n_i, d_i)`, so formats that differ only by
/// a permutation of factors appear once. The output order (by factor count,
/// then lexicographic in the sorted factor list) is deterministic.
pub fn scan(n_max: u32, d_max: u32, r_max: u32) -> Vec<ScanEntry> {
    scan_with(Parallelism::Rayon, n_max, d_max, r_max)
}

/// [`scan`] with an explicit execution strategy.
pub fn scan_with(par: Parallelism, n_max: u32, d_max: u32, r_max: u32) -> Vec<ScanEntry> {
    let pairs: Vec<(u32, u32)> =
        (1..=n_max).flat_map(|n| (1..=d_max).map(move |d| (n, d))).collect();
    let mut specs = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for r in 1..=r_max as usize {
        stack.clear();
        emit_sorted_tuples(&pairs, r, 0, &mut stack, &mut specs);
    }
    exec::map_indexed(par, specs.len(), |i| {
        let spec = specs[i].clone();
        let profile = rank_profile(&spec);
        let report = criterion(&spec);
        ScanEntry { spec, profile, criterion: report }
    })
}

fn emit_sorted_tuples(
    pairs: &[(u32, u32)],
    remaining: usize,
    start: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<SVSpec>,
) {
    if remaining == 0 {
        let n = stack.iter().map(|&i| pairs[i].0).collect();
        let d = stack.iter().map(|&i| pairs[i].1).collect();
        out.push(SVSpec::new(n, d).expect("enumerated factors are positive"));
        return;
    }
    for i in start..pairs.len() {
        stack.push(i);
        emit_sorted_tuples(pairs, remaining - 1, i, stack, out);
        stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &[u32], d: &[u32]) -> SVSpec {
        SVSpec::new(n.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn profile_flagship() {
        let p = rank_profile(&spec(&[1, 1], &[3, 5]));
        assert_eq!(p.ambient_dim, BigInt::from(23));
        assert_eq!(p.variety_dim, 2);
        assert_eq!(p.generic_rank, BigInt::from(8));
        assert!(p.perfect);
    }

    #[test]
    fn profile_segre_3x3() {
        let p = rank_profile(&spec(&[2, 2], &[1, 1]));
        assert_eq!(p.ambient_dim, BigInt::from(8));
        assert_eq!(p.variety_dim, 4);
        assert_eq!(p.generic_rank, BigInt::from(2));
        assert!(!p.perfect);
    }

    #[test]
    fn profile_twisted_cubic() {
        let p = rank_profile(&spec(&[1], &[3]));
        assert_eq!(p.ambient_dim, BigInt::from(3));
        assert_eq!(p.variety_dim, 1);
        assert_eq!(p.generic_rank, BigInt::from(2));
        assert!(p.perfect);
    }

    #[test]
    fn criterion_flagship() {
        let c = criterion(&spec(&[1, 1], &[3, 5]));
        assert_eq!(c.verdict, Verdict::NotIdentifiableByTheorem);
        assert_eq!(c.pivot, 1);
        assert_eq!(c.slope_a, Ratio::new(3, 2));
        assert_eq!(c.nef_margins, vec![Ratio::from_integer(0), Ratio::new(4, 3)]);
    }

    #[test]
    fn criterion_degree_boundary() {
        // d_i = n_i + 1 fails the strict inequality
        let c = criterion(&spec(&[1, 1], &[2, 2]));
        assert!(!c.degree_hypothesis);
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn criterion_rank_boundary() {
        // g = 2 is not > 2 dim X = 2
        let c = criterion(&spec(&[1], &[3]));
        assert!(c.degree_hypothesis);
        assert!(!c.rank_hypothesis);
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn scan_contains_flagship() {
        let entries = scan(1, 5, 2);
        let hit = entries
            .iter()
            .find(|e| e.spec.n() == [1, 1] && e.spec.d() == [3, 5])
            .expect("flagship format enumerated");
        assert_eq!(hit.criterion.verdict, Verdict::NotIdentifiableByTheorem);
    }

    #[test]
    fn scan_trivial_bounds() {
        let entries = scan(1, 1, 1);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].spec.n(), [1]);
        assert_eq!(entries[0].spec.d(), [1]);
        assert_eq!(entries[0].profile.generic_rank, BigInt::from(1));
    }

    #[test]
    fn scan_verdicts_imply_hypotheses() {
        for entry in scan(2, 6, 2) {
            if entry.criterion.verdict == Verdict::NotIdentifiableByTheorem {
                assert!(entry.criterion.degree_hypothesis);
                assert!(entry.criterion.rank_hypothesis);
            }
        }
    }

    #[test]
    fn scan_is_canonical_and_deduplicated() {
        let entries = scan(2, 4, 2);
        // 8 pairs, so 8 singletons + C(9,2) = 36 sorted pairs
        assert_eq!(entries.len(), 44);
        for entry in &entries {
            let factors: Vec<_> =
                entry.spec.n().iter().zip(entry.spec.d()).collect();
            let mut sorted = factors.clone();
            sorted.sort();
            assert_eq!(factors, sorted);
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(SVSpec::new(vec![], vec![]).is_err());
        assert!(SVSpec::new(vec![1, 1], vec![3]).is_err());
        assert!(SVSpec::new(vec![0], vec![3]).is_err());
        assert!(SVSpec::new(vec![1], vec![0]).is_err());
    }
}
