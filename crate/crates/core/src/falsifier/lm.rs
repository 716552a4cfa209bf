//! Levenberg-Marquardt refinement of a weighted rank-one expansion.
//!
//! Parameters are the real and imaginary parts of every weight and every
//! factor-point coordinate, concatenated term by term. The residual stacks
//! the real parts of `sum_j w_j embed(p_j) - T` over the ambient
//! coordinates, then the imaginary parts. Damping is a plain multiple of
//! the identity: lambda starts at 1e-3, halves on an accepted step and
//! quadruples on a rejected one; iteration stops when the relative
//! residual reaches the tolerance, the accepted relative step drops below
//! 1e-12, or the iteration budget runs out.

use crate::classifier::SVSpec;
use crate::embedding::{eval_basis, eval_basis_partial, ExponentIndex};
use crate::error::FitFailure;
use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::Zero;

pub(super) struct Problem<'a> {
    pub spec: &'a SVSpec,
    pub basis: &'a [ExponentIndex],
    pub rank: usize,
    pub target: &'a [Complex64],
    pub target_norm: f64,
    pub options: Options,
}

/// Weight plus one point per factor, before canonicalization.
pub(super) type RawTerm = (Complex64, Vec<Vec<Complex64>>);

impl<'a> Problem<'a> {
    pub fn params_per_term(&self) -> usize {
        2 + self.spec.n().iter().map(|&n| 2 * (n as usize + 1)).sum::<usize>()
    }

    pub fn param_count(&self) -> usize {
        self.rank * self.params_per_term()
    }

    pub fn pack(&self, terms: &[RawTerm]) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.param_count());
        for (weight, points) in terms {
            theta.push(weight.re);
            theta.push(weight.im);
            for point in points {
                for c in point {
                    theta.push(c.re);
                    theta.push(c.im);
                }
            }
        }
        theta
    }

    pub fn unpack(&self, theta: &[f64]) -> Vec<RawTerm> {
        let mut terms = Vec::with_capacity(self.rank);
        let mut cursor = 0;
        for _ in 0..self.rank {
            let weight = Complex64::new(theta[cursor], theta[cursor + 1]);
            cursor += 2;
            let points = self
                .spec
                .n()
                .iter()
                .map(|&n| {
                    (0..=n as usize)
                        .map(|_| {
                            let c = Complex64::new(theta[cursor], theta[cursor + 1]);
                            cursor += 2;
                            c
                        })
                        .collect()
                })
                .collect();
            terms.push((weight, points));
        }
        terms
    }

    pub fn model(&self, terms: &[RawTerm]) -> Vec<Complex64> {
        let mut acc = vec![Complex64::zero(); self.target.len()];
        for (weight, points) in terms {
            let image = eval_basis(self.basis, points);
            for (a, e) in acc.iter_mut().zip(image) {
                *a += weight * e;
            }
        }
        acc
    }

    fn residual(&self, terms: &[RawTerm]) -> DVector<f64> {
        let model = self.model(terms);
        let m = self.target.len();
        let mut r = DVector::zeros(2 * m);
        for (k, (f, t)) in model.iter().zip(self.target).enumerate() {
            let diff = f - t;
            r[k] = diff.re;
            r[m + k] = diff.im;
        }
        r
    }

    fn jacobian(&self, terms: &[RawTerm]) -> DMatrix<f64> {
        let m = self.target.len();
        let mut jac = DMatrix::zeros(2 * m, self.param_count());
        let mut col = 0;
        let store = |jac: &mut DMatrix<f64>, col: usize, column: &[Complex64]| {
            for (k, c) in column.iter().enumerate() {
                // d/dRe x -> c, d/dIm x -> i c
                jac[(k, col)] = c.re;
                jac[(m + k, col)] = c.im;
                jac[(k, col + 1)] = -c.im;
                jac[(m + k, col + 1)] = c.re;
            }
        };
        for (weight, points) in terms {
            let image = eval_basis(self.basis, points);
            store(&mut jac, col, &image);
            col += 2;
            for (factor, point) in points.iter().enumerate() {
                for coord in 0..point.len() {
                    let mut partial = eval_basis_partial(self.basis, points, factor, coord);
                    for entry in partial.iter_mut() {
                        *entry *= weight;
                    }
                    store(&mut jac, col, &partial);
                    col += 2;
                }
            }
        }
        jac
    }
}

pub(super) struct Options {
    pub max_iter: usize,
    pub residual_tol: f64,
}

const LAMBDA_INIT: f64 = 1e-3;
const STEP_FLOOR: f64 = 1e-12;
const MAX_REJECTS: usize = 30;

pub(super) fn minimize(
    problem: &Problem<'_>,
    init: &[RawTerm],
) -> Result<Vec<RawTerm>, FitFailure> {
    let tol_abs = problem.options.residual_tol * problem.target_norm;
    let mut theta = DVector::from_vec(problem.pack(init));
    let mut terms = problem.unpack(theta.as_slice());
    let mut residual = problem.residual(&terms);
    let mut cost = residual.norm();
    let mut lambda = LAMBDA_INIT;

    for _ in 0..problem.options.max_iter {
        if cost <= tol_abs {
            return Ok(terms);
        }
        let jac = problem.jacobian(&terms);
        let jtj = jac.transpose() * &jac;
        let gradient = jac.transpose() * &residual;

        let mut accepted = false;
        for _ in 0..MAX_REJECTS {
            let mut damped = jtj.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda;
            }
            let step = match damped.cholesky() {
                Some(chol) => chol.solve(&gradient),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let trial = &theta - &step;
            let trial_terms = problem.unpack(trial.as_slice());
            let trial_residual = problem.residual(&trial_terms);
            let trial_cost = trial_residual.norm();
            if trial_cost < cost {
                let relative_step = step.norm() / theta.norm().max(1e-300);
                theta = trial;
                terms = trial_terms;
                residual = trial_residual;
                cost = trial_cost;
                lambda = (lambda * 0.5).max(1e-300);
                accepted = true;
                if cost <= tol_abs {
                    return Ok(terms);
                }
                if relative_step < STEP_FLOOR {
                    return Err(FitFailure::Stalled);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            return Err(FitFailure::Stalled);
        }
    }
    Err(FitFailure::MaxIter)
}
