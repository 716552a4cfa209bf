//! Tangential weak defectiveness through Hessian kernels.
//!
//! A hyperplane section singular at a point looks, in chart coordinates
//! centered there, like a quadric plus higher-order terms; the quadric is
//! half the Hessian of the pulled-back form, and its kernel (the
//! asymptotic space) contains every tangent direction of the contact
//! locus through the point. Intersecting the kernels over a basis of the
//! tangential system therefore bounds the contact-locus dimension from
//! above: a positive common kernel at the base point is the first-order
//! signature of tangential weak defectiveness.
//!
//! This is a first-order test at the base point: the measured dimension
//! coincides with the contact-locus dimension generically, and components
//! away from the assigned singular points are invisible to it.

use crate::classifier::{rank_profile, SVSpec};
use crate::embedding::hessian;
use crate::linalg;
use crate::seed::derive_seed;
use crate::terracini::{measure_with_retries, sample_points, tangential_system, PointSample};
use crate::{Error, Mode, Result};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default number of random form combinations probed per report.
pub const COMBINATION_TRIALS: usize = 5;

/// Kernel measurements of the tangential system's Hessians at one base
/// point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContactReport {
    pub h: usize,
    /// Dimension of the tangential system (number of basis forms).
    pub form_count: usize,
    /// dim ker Q for random generic forms in the system's span.
    pub per_form_kernel_dims: Vec<usize>,
    /// Dimension of the intersection of all basis-form kernels at the base
    /// point; estimates the contact-locus dimension.
    pub common_kernel_dim: usize,
    /// Whether the common kernel is positive-dimensional.
    pub twd: bool,
    /// 1-based index of the analyzed sample point.
    pub base_point_index: usize,
    pub mode: Mode,
}

fn random_combination_coeffs(rng: &mut ChaCha8Rng, count: usize) -> Vec<i64> {
    loop {
        let coeffs: Vec<i64> = (0..count).map(|_| rng.random_range(-9..=9)).collect();
        if coeffs.iter().any(|&c| c != 0) {
            return coeffs;
        }
    }
}

fn combine<T: Clone + std::ops::AddAssign + num::Zero>(
    hessians: &[Vec<Vec<T>>],
    coeffs: &[i64],
    scale: impl Fn(&T, i64) -> T,
) -> Vec<Vec<T>> {
    let dim = hessians[0].len();
    let mut acc = vec![vec![T::zero(); dim]; dim];
    for (hess, &c) in hessians.iter().zip(coeffs) {
        if c == 0 {
            continue;
        }
        for (row_acc, row) in acc.iter_mut().zip(hess) {
            for (entry_acc, entry) in row_acc.iter_mut().zip(row) {
                *entry_acc += scale(entry, c);
            }
        }
    }
    acc
}

fn exact_hessians(
    spec: &SVSpec,
    sample: &PointSample,
    base_point: usize,
    forms: &[Vec<BigInt>],
) -> Vec<Vec<Vec<BigInt>>> {
    let point = sample.scalar_points::<BigInt>(base_point);
    forms
        .iter()
        .map(|form| {
            hessian(spec, &point, form).expect("tangential forms vanish on the frame")
        })
        .collect()
}

fn float_system(spec: &SVSpec, sample: &PointSample) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for k in 0..sample.h {
        let frame = crate::embedding::tangent_frame::<f64>(spec, &sample.scalar_points(k))
            .expect("sampled points have chart coordinate 1");
        rows.extend(frame);
    }
    let forms = linalg::kernel_f64(&linalg::rows_to_matrix(&rows), linalg::FLOAT_RANK_TOL);
    if forms.is_empty() {
        return Err(Error::FullSpan { h: sample.h });
    }
    Ok(forms)
}

/// Tangential-weak-defectiveness test at the first sample point.
pub fn twd_test(spec: &SVSpec, h: usize, seed: u64) -> Result<ContactReport> {
    twd_test_at(spec, h, seed, 0, Mode::Exact)
}

/// [`twd_test`] with an explicit arithmetic mode.
pub fn twd_test_in_mode(spec: &SVSpec, h: usize, seed: u64, mode: Mode) -> Result<ContactReport> {
    twd_test_at(spec, h, seed, 0, mode)
}

/// Full test with a chosen base point (0-based index into the sample).
///
/// The contact locus is symmetric in the sample points, so the choice is
/// irrelevant generically; [`twd_test_all_points`] asserts that.
pub fn twd_test_at(
    spec: &SVSpec,
    h: usize,
    seed: u64,
    base_point: usize,
    mode: Mode,
) -> Result<ContactReport> {
    let sample = sample_points(spec, h, seed);
    let dim = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[h as u64, base_point as u64]));

    let (form_count, per_form_kernel_dims, common_kernel_dim) = match mode {
        Mode::Exact => {
            let system = tangential_system(spec, &sample)?;
            let hessians = exact_hessians(spec, &sample, base_point, &system.forms);
            let per_form: Vec<usize> = (0..COMBINATION_TRIALS)
                .map(|_| {
                    let coeffs = random_combination_coeffs(&mut rng, hessians.len());
                    let q = combine(&hessians, &coeffs, |e, c| e * BigInt::from(c));
                    dim - linalg::bareiss_rank(q)
                })
                .collect();
            let stacked: Vec<Vec<BigInt>> = hessians.iter().flatten().cloned().collect();
            let common = dim - linalg::bareiss_rank(stacked);
            (hessians.len(), per_form, common)
        }
        Mode::Float => {
            let forms = float_system(spec, &sample)?;
            let point = sample.scalar_points::<f64>(base_point);
            let hessians: Vec<Vec<Vec<f64>>> = forms
                .iter()
                .map(|form| {
                    hessian(spec, &point, form).expect("float kernel forms vanish on the frame")
                })
                .collect();
            let per_form: Vec<usize> = (0..COMBINATION_TRIALS)
                .map(|_| {
                    let coeffs = random_combination_coeffs(&mut rng, hessians.len());
                    let q = combine(&hessians, &coeffs, |e, c| e * c as f64);
                    dim - linalg::svd_rank(&linalg::rows_to_matrix(&q), linalg::FLOAT_RANK_TOL)
                })
                .collect();
            let stacked: Vec<Vec<f64>> = hessians.iter().flatten().cloned().collect();
            let common = dim
                - linalg::svd_rank(&linalg::rows_to_matrix(&stacked), linalg::FLOAT_RANK_TOL);
            (hessians.len(), per_form, common)
        }
    };

    Ok(ContactReport {
        h,
        form_count,
        per_form_kernel_dims,
        common_kernel_dim,
        twd: common_kernel_dim > 0,
        base_point_index: base_point + 1,
        mode,
    })
}

/// Runs the twd test once per sample point; generically all reports agree
/// on the common kernel dimension.
pub fn twd_test_all_points(spec: &SVSpec, h: usize, seed: u64) -> Result<Vec<ContactReport>> {
    (0..h).map(|k| twd_test_at(spec, h, seed, k, Mode::Exact)).collect()
}

/// Outcome of the zero-dimensional-contact check at h = g - 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroDimReport {
    /// Whether g > 2 dim X, the numerical hypothesis under which the
    /// (g-1)-st contact locus provably collapses to the base points.
    pub rank_hypothesis_met: bool,
    /// Whether the measured common kernel is zero, as expected.
    pub matches_expectation: bool,
    pub contact: ContactReport,
}

/// Checks that the span of g - 1 tangent spaces is tangent only along a
/// zero-dimensional scheme, for perfect formats that are defect-free
/// through g - 1.
pub fn zero_dim_check(spec: &SVSpec, seed: u64) -> Result<ZeroDimReport> {
    zero_dim_check_in_mode(spec, seed, Mode::Exact)
}

/// [`zero_dim_check`] with an explicit arithmetic mode.
pub fn zero_dim_check_in_mode(spec: &SVSpec, seed: u64, mode: Mode) -> Result<ZeroDimReport> {
    let profile = rank_profile(spec);
    if !profile.perfect {
        return Err(Error::HypothesisUnmet(format!(
            "{spec} is not perfect: {} does not divide {}",
            profile.variety_dim + 1,
            profile.ambient_dim.clone() + BigInt::from(1),
        )));
    }
    let g = profile.generic_rank_usize()?;
    if g < 2 {
        return Err(Error::HypothesisUnmet(format!("{spec} has generic rank 1")));
    }
    for h in 1..g {
        let report = measure_with_retries(spec, h, seed, mode);
        if report.defect > 0 {
            return Err(Error::HypothesisUnmet(format!(
                "{spec} looks {h}-defective (defect {} at h={h})",
                report.defect
            )));
        }
    }
    let contact = twd_test_in_mode(spec, g - 1, seed, mode)?;
    Ok(ZeroDimReport {
        rank_hypothesis_met: BigInt::from(g) > BigInt::from(2 * profile.variety_dim),
        matches_expectation: contact.common_kernel_dim == 0,
        contact,
    })
}

/// Ranks of the Hessians of `trials` random forms in the tangential
/// system's span, at the first sample point.
///
/// Generic forms share one rank; if the trials disagree the sample was
/// non-generic and the whole measurement is retried with a derived seed
/// (twice at most).
pub fn hessian_rank_profile(
    spec: &SVSpec,
    h: usize,
    seed: u64,
    trials: usize,
) -> Result<Vec<usize>> {
    let mut attempt_seed = seed;
    let mut ranks = Vec::new();
    for attempt in 0..3u64 {
        let sample = sample_points(spec, h, attempt_seed);
        let system = tangential_system(spec, &sample)?;
        let hessians = exact_hessians(spec, &sample, 0, &system.forms);
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(attempt_seed, &[h as u64, trials as u64]));
        ranks = (0..trials)
            .map(|_| {
                let coeffs = random_combination_coeffs(&mut rng, hessians.len());
                let q = combine(&hessians, &coeffs, |e, c| e * BigInt::from(c));
                linalg::bareiss_rank(q)
            })
            .collect();
        if ranks.windows(2).all(|w| w[0] == w[1]) {
            break;
        }
        attempt_seed = derive_seed(seed, &[h as u64, u64::MAX, attempt]);
    }
    Ok(ranks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &[u32], d: &[u32]) -> SVSpec {
        SVSpec::new(n.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn segre_3x3_contact_surface() {
        let report = twd_test(&spec(&[2, 2], &[1, 1]), 2, 0).unwrap();
        assert_eq!(report.form_count, 1);
        assert_eq!(report.common_kernel_dim, 2);
        assert!(report.twd);
        assert!(report.per_form_kernel_dims.iter().all(|&k| k == 2));
    }

    #[test]
    fn veronese_conic_pencil_contact_line() {
        let report = twd_test(&spec(&[2], &[2]), 2, 0).unwrap();
        assert_eq!(report.form_count, 1);
        assert_eq!(report.common_kernel_dim, 1);
        assert!(report.twd);
    }

    #[test]
    fn veronese_single_point_is_ordinary() {
        let report = twd_test(&spec(&[2], &[2]), 1, 0).unwrap();
        assert_eq!(report.common_kernel_dim, 0);
        assert!(!report.twd);
        // generic singular conic is two distinct lines: full-rank quadric
        assert!(report.per_form_kernel_dims.iter().all(|&k| k == 0));
    }

    #[test]
    fn kernel_sandwich() {
        for (n, d, h) in [(vec![2, 2], vec![1, 1], 2), (vec![2], vec![2], 1)] {
            let report = twd_test(&SVSpec::new(n, d).unwrap(), h, 1).unwrap();
            let min_per_form = report.per_form_kernel_dims.iter().min().copied().unwrap();
            assert!(report.common_kernel_dim <= min_per_form);
        }
    }

    #[test]
    fn base_point_choice_is_irrelevant() {
        let reports = twd_test_all_points(&spec(&[2, 2], &[1, 1]), 2, 9).unwrap();
        assert!(reports.iter().all(|r| r.common_kernel_dim == 2));
    }

    #[test]
    fn hessian_ranks_are_constant_and_scale_invariant() {
        let ranks = hessian_rank_profile(&spec(&[2], &[2]), 1, 0, 5).unwrap();
        assert_eq!(ranks, vec![2; 5]);
        // rank of a scaled form is unchanged: 3x the form in the 1-form case
        let s = spec(&[2], &[2]);
        let sample = sample_points(&s, 2, 0);
        let system = tangential_system(&s, &sample).unwrap();
        let point = sample.scalar_points::<BigInt>(0);
        let q = hessian(&s, &point, &system.forms[0]).unwrap();
        let scaled: Vec<BigInt> = system.forms[0].iter().map(|c| c * BigInt::from(3)).collect();
        let q3 = hessian(&s, &point, &scaled).unwrap();
        assert_eq!(linalg::bareiss_rank(q), linalg::bareiss_rank(q3));
    }

    #[test]
    fn segre_3x3_combination_ranks() {
        let ranks = hessian_rank_profile(&spec(&[2, 2], &[1, 1]), 2, 0, 5).unwrap();
        assert_eq!(ranks, vec![2; 5]);
    }

    #[test]
    fn zero_dim_check_flagship() {
        let report = zero_dim_check(&spec(&[1, 1], &[3, 5]), 0).unwrap();
        assert_eq!(report.contact.h, 7);
        assert_eq!(report.contact.common_kernel_dim, 0);
        assert!(report.matches_expectation);
        assert!(report.rank_hypothesis_met);
    }

    #[test]
    fn zero_dim_check_rejects_imperfect() {
        assert!(matches!(
            zero_dim_check(&spec(&[2, 2], &[1, 1]), 0),
            Err(Error::HypothesisUnmet(_))
        ));
    }

    #[test]
    fn zero_dim_check_2x2x2() {
        let report = zero_dim_check(&spec(&[1, 1, 1], &[1, 1, 1]), 0).unwrap();
        assert_eq!(report.contact.h, 1);
        assert_eq!(report.contact.common_kernel_dim, 0);
        assert!(report.matches_expectation);
        assert!(!report.rank_hypothesis_met);
    }

    #[test]
    fn float_mode_agrees_with_exact() {
        let exact = twd_test_in_mode(&spec(&[2, 2], &[1, 1]), 2, 4, Mode::Exact).unwrap();
        let float = twd_test_in_mode(&spec(&[2, 2], &[1, 1]), 2, 4, Mode::Float).unwrap();
        assert_eq!(exact.common_kernel_dim, float.common_kernel_dim);
        assert_eq!(exact.twd, float.twd);
    }
}
