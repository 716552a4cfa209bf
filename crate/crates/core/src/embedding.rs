//! The Segre-Veronese monomial parametrization and its derivatives.
//!
//! Coordinates are indexed by tuples of per-factor exponent vectors, one of
//! total degree `d_i` per factor, in decreasing lexicographic order with
//! factor 1 outermost. The coordinate at such a tuple is the plain product
//! of monomials (no multinomial weights: every rank computed downstream is
//! invariant under the diagonal rescaling relating the two conventions).
//!
//! Charts: sampled points keep the 0-th coordinate of every factor at 1,
//! and chart partials are taken with respect to the remaining `n_i`
//! coordinates, factor by factor. The evaluators are generic over the
//! scalar field ([`Scalar`]): exact integers and rationals drive the rank
//! pipeline, `f64` the floating cross-checks, complex numbers the
//! decomposition search.

use crate::classifier::SVSpec;
use crate::scalar::Scalar;
use crate::{Error, Result};

/// One ambient coordinate: an exponent vector of degree `d_i` per factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentIndex {
    pub per_factor: Vec<Vec<u32>>,
}

fn monomials_desc_lex(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for lead in (0..=degree).rev() {
        for mut tail in monomials_desc_lex(vars - 1, degree - lead) {
            let mut exps = Vec::with_capacity(vars);
            exps.push(lead);
            exps.append(&mut tail);
            out.push(exps);
        }
    }
    out
}

/// The ordered coordinate system of the embedding; `N + 1` entries.
pub fn coordinate_basis(spec: &SVSpec) -> Vec<ExponentIndex> {
    let factor_bases: Vec<Vec<Vec<u32>>> = spec
        .n()
        .iter()
        .zip(spec.d())
        .map(|(&n, &d)| monomials_desc_lex(n as usize + 1, d))
        .collect();
    let mut basis = vec![ExponentIndex { per_factor: Vec::new() }];
    for factor_base in &factor_bases {
        let mut next = Vec::with_capacity(basis.len() * factor_base.len());
        for prefix in &basis {
            for exps in factor_base {
                let mut per_factor = prefix.per_factor.clone();
                per_factor.push(exps.clone());
                next.push(ExponentIndex { per_factor });
            }
        }
        basis = next;
    }
    basis
}

fn validate_points<T: Scalar>(spec: &SVSpec, points: &[Vec<T>]) -> Result<()> {
    if points.len() != spec.factors() {
        return Err(Error::InvalidSpec(format!(
            "expected {} factor points, got {}",
            spec.factors(),
            points.len()
        )));
    }
    for (i, (&n, point)) in spec.n().iter().zip(points).enumerate() {
        if point.len() != n as usize + 1 {
            return Err(Error::InvalidSpec(format!(
                "factor point {} has {} coordinates, expected {}",
                i,
                point.len(),
                n + 1
            )));
        }
        if point.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroPoint { factor: i });
        }
    }
    Ok(())
}

fn pow<T: Scalar>(base: &T, exp: u32) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

/// Evaluates one monomial with the exponent at `(factor, coord)` positions
/// lowered as directed; `lower` returns how much to subtract. The caller is
/// responsible for the falling-factorial coefficients.
fn monomial_value<T: Scalar>(
    idx: &ExponentIndex,
    points: &[Vec<T>],
    lower: impl Fn(usize, usize) -> u32,
) -> T {
    let mut acc = T::one();
    for (factor, exps) in idx.per_factor.iter().enumerate() {
        for (coord, &e) in exps.iter().enumerate() {
            let drop = lower(factor, coord);
            debug_assert!(drop <= e);
            acc = acc * pow(&points[factor][coord], e - drop);
        }
    }
    acc
}

pub(crate) fn eval_basis<T: Scalar>(basis: &[ExponentIndex], points: &[Vec<T>]) -> Vec<T> {
    basis.iter().map(|idx| monomial_value(idx, points, |_, _| 0)).collect()
}

/// First partial derivative of every coordinate with respect to the given
/// factor coordinate.
pub(crate) fn eval_basis_partial<T: Scalar>(
    basis: &[ExponentIndex],
    points: &[Vec<T>],
    factor: usize,
    coord: usize,
) -> Vec<T> {
    basis
        .iter()
        .map(|idx| {
            let e = idx.per_factor[factor][coord];
            if e == 0 {
                return T::zero();
            }
            let value = monomial_value(idx, points, |f, c| u32::from(f == factor && c == coord));
            T::from_i64(e as i64) * value
        })
        .collect()
}

fn eval_basis_second_partial<T: Scalar>(
    basis: &[ExponentIndex],
    points: &[Vec<T>],
    a: (usize, usize),
    b: (usize, usize),
) -> Vec<T> {
    basis
        .iter()
        .map(|idx| {
            let ea = idx.per_factor[a.0][a.1];
            let coeff = if a == b {
                if ea < 2 {
                    return T::zero();
                }
                ea as i64 * (ea as i64 - 1)
            } else {
                let eb = idx.per_factor[b.0][b.1];
                if ea == 0 || eb == 0 {
                    return T::zero();
                }
                ea as i64 * eb as i64
            };
            let value = monomial_value(idx, points, |f, c| {
                u32::from((f, c) == a) + u32::from((f, c) == b)
            });
            T::from_i64(coeff) * value
        })
        .collect()
}

/// Chart coordinates in frame order: factor by factor, coordinates
/// `1..=n_i`.
pub(crate) fn chart_coords(spec: &SVSpec) -> Vec<(usize, usize)> {
    let mut coords = Vec::with_capacity(spec.dim());
    for (factor, &n) in spec.n().iter().enumerate() {
        for coord in 1..=n as usize {
            coords.push((factor, coord));
        }
    }
    coords
}

/// Evaluates the embedding at one point per factor.
pub fn embed<T: Scalar>(spec: &SVSpec, points: &[Vec<T>]) -> Result<Vec<T>> {
    validate_points(spec, points)?;
    Ok(eval_basis(&coordinate_basis(spec), points))
}

/// The embedded point followed by its chart partials: `dim X + 1` rows
/// spanning the affine cone over the tangent space at a generic point.
pub fn tangent_frame<T: Scalar>(spec: &SVSpec, points: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    validate_points(spec, points)?;
    let basis = coordinate_basis(spec);
    let mut rows = Vec::with_capacity(spec.dim() + 1);
    rows.push(eval_basis(&basis, points));
    for (factor, coord) in chart_coords(spec) {
        rows.push(eval_basis_partial(&basis, points, factor, coord));
    }
    Ok(rows)
}

/// Hessian of the pulled-back linear form `ell` at the point, in chart
/// coordinates: a symmetric `dim X` by `dim X` matrix.
///
/// The form must vanish on the whole tangent frame at the point (it cuts a
/// hyperplane section singular there); this is checked exactly for exact
/// scalars and against `1e-9 * |ell| * |row|` for floating ones.
pub fn hessian<T: Scalar>(spec: &SVSpec, points: &[Vec<T>], ell: &[T]) -> Result<Vec<Vec<T>>> {
    validate_points(spec, points)?;
    let basis = coordinate_basis(spec);
    if ell.len() != basis.len() {
        return Err(Error::InvalidSpec(format!(
            "linear form has {} coordinates, ambient space has {}",
            ell.len(),
            basis.len()
        )));
    }
    let frame = tangent_frame(spec, points)?;
    let ell_scale: f64 = ell.iter().map(|c| c.magnitude().powi(2)).sum::<f64>().sqrt();
    for (i, row) in frame.iter().enumerate() {
        let dot = dot(ell, row);
        let row_scale: f64 = row.iter().map(|c| c.magnitude().powi(2)).sum::<f64>().sqrt();
        if !T::dot_vanishes(&dot, ell_scale * row_scale) {
            return Err(Error::PreconditionViolated { row: i });
        }
    }
    let coords = chart_coords(spec);
    let dim = coords.len();
    let mut sym = vec![vec![T::zero(); dim]; dim];
    for u in 0..dim {
        for v in u..dim {
            let column = eval_basis_second_partial(&basis, points, coords[u], coords[v]);
            let entry = dot(ell, &column);
            sym[u][v] = entry.clone();
            sym[v][u] = entry;
        }
    }
    Ok(sym)
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}
