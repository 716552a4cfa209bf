//! Tangential projections and the generic-finiteness necessary condition.
//!
//! The tangential projection from h general points is the rational map
//! whose coordinates are a basis of the tangential linear system. For an
//! identifiable variety the projection from g - 1 points must be
//! birational onto projective space of the variety's dimension; the
//! computable necessary part is generic finiteness, read off the rank of
//! the projective differential at a fresh random point. A full-rank
//! differential is a certificate (semicontinuity); a rank drop is retried
//! with fresh evaluation points before being reported as fiber type.
//!
//! Whether a generically finite projection has degree 1 is deliberately
//! not decided here; that needs monodromy-style degree counts.

use crate::classifier::{rank_profile, SVSpec};
use crate::embedding::{dot, tangent_frame};
use crate::linalg;
use crate::seed::derive_seed;
use crate::terracini::{ambient_count, sample_points, tangential_system, COORDINATE_BOX};
use crate::{Error, Mode, Result};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// A tangential projection presented by its coordinate forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionMap {
    pub h: usize,
    /// Basis of the tangential system; the map's homogeneous coordinates.
    pub forms: Vec<Vec<BigInt>>,
    /// Dimension of the target projective space (form count minus one).
    pub target_dim: usize,
}

impl ProjectionMap {
    /// Applies the map to a point of the product, returning homogeneous
    /// coordinates (all zero exactly on the base locus).
    pub fn apply(&self, spec: &SVSpec, points: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
        let image = crate::embedding::embed(spec, points)?;
        Ok(self.forms.iter().map(|form| dot(form, &image)).collect())
    }
}

/// Builds the h-tangential projection from a seeded sample.
pub fn tangential_projection(spec: &SVSpec, h: usize, seed: u64) -> Result<ProjectionMap> {
    let sample = sample_points(spec, h, seed);
    let system = tangential_system(spec, &sample)?;
    let target_dim = system.forms.len() - 1;
    Ok(ProjectionMap { h, forms: system.forms, target_dim })
}

/// Rank of the projective differential of the (g-1)-tangential projection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinitenessReport {
    pub h: usize,
    /// Rank of the projective differential at a generic point; at most
    /// min(dim X, target dimension).
    pub jacobian_rank: usize,
    /// jacobian_rank = dim X: the projection is generically finite
    /// (certificate).
    pub generically_finite: bool,
    /// jacobian_rank < dim X after retries: positive-dimensional generic
    /// fibers, with high probability.
    pub fiber_type: bool,
    pub mode: Mode,
}

fn fresh_point(spec: &SVSpec, sample: &[Vec<Vec<i64>>], seed: u64) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let candidate: Vec<Vec<i64>> = spec
            .n()
            .iter()
            .map(|&n| {
                let mut p = Vec::with_capacity(n as usize + 1);
                p.push(1);
                for _ in 0..n {
                    p.push(rng.random_range(-COORDINATE_BOX..=COORDINATE_BOX));
                }
                p
            })
            .collect();
        if !sample.iter().any(|prev| prev == &candidate) {
            return candidate;
        }
    }
}

fn differential_rank(
    spec: &SVSpec,
    forms: &[Vec<BigInt>],
    point: &[Vec<i64>],
    mode: Mode,
) -> usize {
    // Pair every form with every frame row at the evaluation point: column
    // 0 is the image point itself, the rest the chart partials. The
    // projective differential has the rank of this matrix minus one.
    let scalar_point: Vec<Vec<BigInt>> =
        point.iter().map(|p| p.iter().map(|&c| BigInt::from(c)).collect()).collect();
    let frame = tangent_frame(spec, &scalar_point).expect("fresh points have chart coordinate 1");
    let paired: Vec<Vec<BigInt>> = forms
        .iter()
        .map(|form| frame.iter().map(|row| dot(form, row)).collect())
        .collect();
    let rank = match mode {
        Mode::Exact => linalg::bareiss_rank(paired),
        Mode::Float => {
            let rows: Vec<Vec<f64>> = paired
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| {
                            use num::ToPrimitive;
                            e.to_f64().unwrap_or(f64::INFINITY)
                        })
                        .collect()
                })
                .collect();
            linalg::svd_rank(&linalg::rows_to_matrix(&rows), linalg::FLOAT_RANK_TOL)
        }
    };
    rank.saturating_sub(1)
}

/// Measures generic finiteness of the (g-1)-tangential projection.
pub fn finiteness_check(spec: &SVSpec, seed: u64) -> Result<FinitenessReport> {
    finiteness_check_in_mode(spec, seed, Mode::Exact)
}

/// [`finiteness_check`] with an explicit arithmetic mode.
pub fn finiteness_check_in_mode(spec: &SVSpec, seed: u64, mode: Mode) -> Result<FinitenessReport> {
    ambient_count(spec)?;
    let profile = rank_profile(spec);
    let g = profile.generic_rank_usize()?;
    if g < 2 {
        return Err(Error::HypothesisUnmet(format!("{spec} has generic rank 1")));
    }
    let h = g - 1;
    let sample = sample_points(spec, h, seed);
    let system = tangential_system(spec, &sample)?;
    let dim = spec.dim();

    let mut jacobian_rank = 0;
    for attempt in 0..4u64 {
        let point = fresh_point(spec, &sample.points, derive_seed(seed, &[h as u64, attempt]));
        jacobian_rank = jacobian_rank.max(differential_rank(spec, &system.forms, &point, mode));
        if jacobian_rank == dim {
            break;
        }
    }
    Ok(FinitenessReport {
        h,
        jacobian_rank,
        generically_finite: jacobian_rank == dim,
        fiber_type: jacobian_rank < dim,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn spec(n: &[u32], d: &[u32]) -> SVSpec {
        SVSpec::new(n.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn flagship_projection_targets_the_plane() {
        let map = tangential_projection(&spec(&[1, 1], &[3, 5]), 7, 2).unwrap();
        assert_eq!(map.target_dim, 2);
    }

    #[test]
    fn perfect_defect_free_target_dim_is_variety_dim() {
        // 2x2x2: g = 2, h = 1, and N + 1 - (dim X + 1) = dim X + 1 forms
        let s = spec(&[1, 1, 1], &[1, 1, 1]);
        let map = tangential_projection(&s, 1, 5).unwrap();
        assert_eq!(map.target_dim, s.dim());
    }

    #[test]
    fn sample_points_are_in_the_base_locus() {
        let s = spec(&[1, 1], &[3, 5]);
        let seed = 3;
        let map = tangential_projection(&s, 7, seed).unwrap();
        let sample = sample_points(&s, 7, seed);
        for k in 0..7 {
            let image = map.apply(&s, &sample.scalar_points(k)).unwrap();
            assert!(image.iter().all(BigInt::is_zero));
        }
        // and a fresh point is not
        let fresh = fresh_point(&s, &sample.points, derive_seed(seed, &[7, 0]));
        let scalar: Vec<Vec<BigInt>> =
            fresh.iter().map(|p| p.iter().map(|&c| BigInt::from(c)).collect()).collect();
        let image = map.apply(&s, &scalar).unwrap();
        assert!(image.iter().any(|c| !c.is_zero()));
    }

    #[test]
    fn flagship_projection_is_generically_finite() {
        let report = finiteness_check(&spec(&[1, 1], &[3, 5]), 0).unwrap();
        assert_eq!(report.jacobian_rank, 2);
        assert!(report.generically_finite);
        assert!(!report.fiber_type);
    }

    #[test]
    fn segre_2x2x2_is_generically_finite() {
        let report = finiteness_check(&spec(&[1, 1, 1], &[1, 1, 1]), 0).unwrap();
        assert_eq!(report.jacobian_rank, 3);
        assert!(report.generically_finite);
    }

    #[test]
    fn imperfect_format_is_fiber_type() {
        // (1,1) x (3,3): g = 6 and the system at h = 5 is a single form,
        // so the target is a point and the rank collapses
        let report = finiteness_check(&spec(&[1, 1], &[3, 3]), 0).unwrap();
        assert!(report.jacobian_rank < 2);
        assert!(report.fiber_type);
    }

    #[test]
    fn float_mode_agrees() {
        let exact = finiteness_check_in_mode(&spec(&[1, 1, 1], &[1, 1, 1]), 1, Mode::Exact).unwrap();
        let float = finiteness_check_in_mode(&spec(&[1, 1, 1], &[1, 1, 1]), 1, Mode::Float).unwrap();
        assert_eq!(exact.jacobian_rank, float.jacobian_rank);
    }
}
