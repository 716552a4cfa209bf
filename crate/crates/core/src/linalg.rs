//! Linear algebra kernels behind every rank and kernel decision.
//!
//! Exact mode works on integer matrices with fraction-free (Bareiss)
//! elimination for ranks and rational reduced row echelon form for null
//! spaces; the returned null-space bases are rescaled to primitive integer
//! vectors. Float mode uses SVD with a relative singular-value cutoff and is
//! only a cross-check: verdicts are driven by the exact path.

use nalgebra::DMatrix;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

/// Relative singular-value cutoff for float-mode rank decisions.
pub const FLOAT_RANK_TOL: f64 = 1e-8;

/// Rank of an integer matrix by fraction-free Gaussian elimination.
///
/// Every intermediate entry is a minor of the input matrix, so the division
/// by the previous pivot is exact; this is asserted on every step.
pub fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let n_rows = rows.len();
    if n_rows == 0 {
        return 0;
    }
    let n_cols = rows[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            for j in (col + 1)..n_cols {
                let num = &row[j] * &pivot_row[col] - &row[col] * &pivot_row[j];
                let (quot, rem) = num.div_rem(&prev);
                assert!(rem.is_zero(), "fraction-free elimination lost exactness");
                row[j] = quot;
            }
            row[col] = BigInt::zero();
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    rank
}

/// In-place reduced row echelon form over the rationals.
///
/// Returns the rank and the pivot column of each nonzero row.
pub fn rref(rows: &mut [Vec<BigRational>]) -> (usize, Vec<usize>) {
    let n_rows = rows.len();
    if n_rows == 0 {
        return (0, Vec::new());
    }
    let n_cols = rows[0].len();
    let mut rank = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(pivot) = (rank..n_rows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        for entry in rows[rank].iter_mut() {
            *entry = &*entry * &inv;
        }
        for i in 0..n_rows {
            if i == rank || rows[i][col].is_zero() {
                continue;
            }
            let factor = rows[i][col].clone();
            for j in 0..n_cols {
                let sub = &factor * &rows[rank][j];
                rows[i][j] = &rows[i][j] - &sub;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    (rank, pivot_cols)
}

/// Clears denominators and common factors, normalizing the sign so the
/// first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for entry in v {
        lcm = lcm.lcm(entry.denom());
    }
    let mut ints: Vec<BigInt> = v.iter().map(|e| (e * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let mut gcd = BigInt::zero();
    for entry in &ints {
        gcd = gcd.gcd(entry);
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for entry in ints.iter_mut() {
            *entry = &*entry / &gcd;
        }
    }
    if let Some(first) = ints.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            for entry in ints.iter_mut() {
                *entry = -entry.clone();
            }
        }
    }
    ints
}

/// Basis of the right null space of an integer matrix, as primitive integer
/// vectors in deterministic (free-column ascending) order.
pub fn right_kernel(rows: &[Vec<BigInt>], n_cols: usize) -> Vec<Vec<BigInt>> {
    let mut rat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|row| row.iter().map(|e| BigRational::from_integer(e.clone())).collect())
        .collect();
    let (rank, pivot_cols) = rref(&mut rat);
    let mut basis = Vec::with_capacity(n_cols - rank);
    let is_pivot: Vec<bool> = {
        let mut flags = vec![false; n_cols];
        for &col in &pivot_cols {
            flags[col] = true;
        }
        flags
    };
    for free in 0..n_cols {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![BigRational::zero(); n_cols];
        vec[free] = BigRational::one();
        for (row, &col) in pivot_cols.iter().enumerate() {
            vec[col] = -rat[row][free].clone();
        }
        basis.push(primitive_integer_vector(&vec));
    }
    basis
}

/// Rank of a float matrix: singular values above `rel_tol * sigma_max`.
pub fn svd_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    if sigma_max <= 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * sigma_max).count()
}

/// Orthonormal basis of the right null space of a float matrix.
///
/// Wide matrices are padded with zero rows first: the thin SVD of a wide
/// matrix does not expose the full kernel, while the padded square one
/// does, without changing the kernel.
pub fn kernel_f64(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.max();
    let mut basis = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma_max <= 0.0 || sigma <= rel_tol * sigma_max {
            basis.push(v_t.row(i).iter().cloned().collect());
        }
    }
    basis
}

/// Converts integer rows to a float matrix.
pub fn to_f64_matrix(rows: &[Vec<i64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    DMatrix::from_fn(r, c, |i, j| rows[i][j] as f64)
}

/// Builds a float matrix from `f64` rows.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_rows(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&e| BigInt::from(e)).collect()).collect()
    }

    #[test]
    fn bareiss_rank_basics() {
        assert_eq!(bareiss_rank(int_rows(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(bareiss_rank(int_rows(&[&[1, 2], &[3, 4]])), 2);
        assert_eq!(bareiss_rank(int_rows(&[&[0, 0], &[0, 0]])), 0);
        // column skip: the first column is identically zero
        assert_eq!(bareiss_rank(int_rows(&[&[0, 1, 2], &[0, 2, 5]])), 2);
    }

    #[test]
    fn kernel_annihilates_rows() {
        let rows = int_rows(&[&[1, 2, 3, 4], &[0, 1, 1, 1]]);
        let kernel = right_kernel(&rows, 4);
        assert_eq!(kernel.len(), 2);
        for v in &kernel {
            for row in &rows {
                let dot: BigInt = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn primitive_vector_is_reduced() {
        let v = vec![
            BigRational::new(BigInt::from(-2), BigInt::from(3)),
            BigRational::new(BigInt::from(4), BigInt::from(3)),
        ];
        assert_eq!(primitive_integer_vector(&v), vec![BigInt::from(1), BigInt::from(-2)]);
    }

    #[test]
    fn float_rank_matches_exact_on_integers() {
        let rows = vec![vec![1_i64, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        let m = to_f64_matrix(&rows);
        assert_eq!(svd_rank(&m, FLOAT_RANK_TOL), 2);
        assert_eq!(kernel_f64(&m, FLOAT_RANK_TOL).len(), 1);
    }
}
