//! Secant dimensions, defects and tangential linear systems.
//!
//! By Terracini's lemma the tangent space to the h-th secant variety at a
//! general point of the span of h general points is the span of the
//! tangent spaces at those points. Stacking the h tangent frames therefore
//! turns "dimension of the secant variety" into a rank computation, and
//! the hyperplanes singular at all h points (the tangential linear system)
//! into the kernel of the stacked matrix.
//!
//! In exact mode a measured rank is a true lower bound for the generic
//! rank of the stacked system: defect 0 at a single sample certifies
//! non-defectivity at that h, while a positive defect is "defective with
//! high probability" and triggers retries with fresh derived seeds.

use crate::classifier::{rank_profile, SVSpec};
use crate::embedding::tangent_frame;
use crate::exec::{self, Parallelism};
use crate::linalg;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::{Error, Mode, Result};
use num::{BigInt, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Sampled factor coordinates are integers in `[-BOX, BOX]`: large enough
/// that accidental rank drops have negligible probability, small enough to
/// keep exact entries bounded (they grow like `BOX^max(d_i)`).
pub const COORDINATE_BOX: i64 = 10_000;

/// h tuples of integer factor points, chart coordinate pinned to 1.
///
/// Points are drawn sequentially from a single seeded stream, so the
/// sample for h extends the sample for h - 1 at the same seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSample {
    pub seed: u64,
    pub h: usize,
    pub points: Vec<Vec<Vec<i64>>>,
}

impl PointSample {
    /// The k-th point tuple converted into the requested scalar field.
    pub fn scalar_points<T: Scalar>(&self, k: usize) -> Vec<Vec<T>> {
        self.points[k]
            .iter()
            .map(|p| p.iter().map(|&c| T::from_i64(c)).collect())
            .collect()
    }
}

/// Draws h pairwise distinct point tuples from a deterministic generator.
pub fn sample_points(spec: &SVSpec, h: usize, seed: u64) -> PointSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<Vec<i64>>> = Vec::with_capacity(h);
    while points.len() < h {
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
        if points.iter().any(|prev| prev == &candidate) {
            continue;
        }
        points.push(candidate);
    }
    PointSample { seed, h, points }
}

/// Number of ambient coordinates as a machine integer, or an error when
/// the format is beyond desk scale.
pub(crate) fn ambient_count(spec: &SVSpec) -> Result<usize> {
    spec.coordinate_count()
        .to_usize()
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| Error::RankTooLarge(spec.coordinate_count().to_string()))
}

/// Stacks the tangent frames of the first `h` sample points into an
/// `h (dim X + 1)` by `N + 1` integer matrix.
pub(crate) fn stacked_frame_int(spec: &SVSpec, sample: &PointSample, h: usize) -> Vec<Vec<BigInt>> {
    let mut rows = Vec::with_capacity(h * (spec.dim() + 1));
    for k in 0..h {
        let frame = tangent_frame::<BigInt>(spec, &sample.scalar_points(k))
            .expect("sampled points have chart coordinate 1");
        rows.extend(frame);
    }
    rows
}

fn stacked_rank(spec: &SVSpec, sample: &PointSample, h: usize, mode: Mode) -> usize {
    match mode {
        Mode::Exact => linalg::bareiss_rank(stacked_frame_int(spec, sample, h)),
        Mode::Float => {
            let mut rows = Vec::with_capacity(h * (spec.dim() + 1));
            for k in 0..h {
                let frame = tangent_frame::<f64>(spec, &sample.scalar_points(k))
                    .expect("sampled points have chart coordinate 1");
                rows.extend(frame);
            }
            linalg::svd_rank(&linalg::rows_to_matrix(&rows), linalg::FLOAT_RANK_TOL)
        }
    }
}

/// Measured versus expected dimension of the stacked tangent system at one
/// value of h.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerraciniReport {
    pub h: usize,
    /// min(h (dim X + 1), N + 1).
    pub expected_affine_rank: usize,
    pub measured_rank: usize,
    /// expected minus measured; 0 certifies non-h-defectivity in exact mode.
    pub defect: usize,
    pub mode: Mode,
}

/// Measures the affine rank of the stacked tangent frames at h random
/// points, in exact arithmetic.
pub fn secant_rank(spec: &SVSpec, h: usize, seed: u64) -> Result<TerraciniReport> {
    secant_rank_in_mode(spec, h, seed, Mode::Exact)
}

/// [`secant_rank`] with an explicit arithmetic mode.
pub fn secant_rank_in_mode(
    spec: &SVSpec,
    h: usize,
    seed: u64,
    mode: Mode,
) -> Result<TerraciniReport> {
    let n1 = ambient_count(spec)?;
    let sample = sample_points(spec, h, seed);
    let measured_rank = stacked_rank(spec, &sample, h, mode);
    let expected_affine_rank = (h * (spec.dim() + 1)).min(n1);
    Ok(TerraciniReport {
        h,
        expected_affine_rank,
        measured_rank,
        defect: expected_affine_rank - measured_rank,
        mode,
    })
}

pub(crate) fn measure_with_retries(spec: &SVSpec, h: usize, seed: u64, mode: Mode) -> TerraciniReport {
    let mut report =
        secant_rank_in_mode(spec, h, seed, mode).expect("caller checked the ambient size");
    for retry in 1..=2u64 {
        if report.defect == 0 {
            break;
        }
        let alt_seed = derive_seed(seed, &[h as u64, retry]);
        let alt = secant_rank_in_mode(spec, h, alt_seed, mode)
            .expect("caller checked the ambient size");
        if alt.measured_rank > report.measured_rank {
            report = alt;
        }
    }
    report
}

/// One Terracini measurement per h = 1..g, retrying any positive defect
/// with two extra derived seeds and keeping the largest rank seen.
pub fn defectivity_scan(spec: &SVSpec, seed: u64) -> Result<Vec<TerraciniReport>> {
    defectivity_scan_with(Parallelism::Rayon, spec, seed, Mode::Exact)
}

/// [`defectivity_scan`] with explicit execution strategy and mode.
pub fn defectivity_scan_with(
    par: Parallelism,
    spec: &SVSpec,
    seed: u64,
    mode: Mode,
) -> Result<Vec<TerraciniReport>> {
    ambient_count(spec)?;
    let g = rank_profile(spec).generic_rank_usize()?;
    Ok(exec::map_indexed(par, g, |i| measure_with_retries(spec, i + 1, seed, mode)))
}

/// Basis of the linear forms vanishing on every tangent frame of the
/// sample: the hyperplanes singular at all h points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentialSystem {
    pub h: usize,
    /// Primitive integer forms; `N + 1 - measured_rank` of them.
    pub forms: Vec<Vec<BigInt>>,
}

/// Extracts the tangential linear system from a point sample.
pub fn tangential_system(spec: &SVSpec, sample: &PointSample) -> Result<TangentialSystem> {
    let n1 = ambient_count(spec)?;
    let rows = stacked_frame_int(spec, sample, sample.h);
    let forms = linalg::right_kernel(&rows, n1);
    if forms.is_empty() {
        return Err(Error::FullSpan { h: sample.h });
    }
    Ok(TangentialSystem { h: sample.h, forms })
}
