//! Small dense linear-algebra helpers over `nalgebra`. Everything here works
//! on row lists (`&[Vec<f64>]`) because callers build their systems row by
//! row from utility differences.

use nalgebra::{DMatrix, DVector};

fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Pivot magnitudes from a column-pivoted QR, in decreasing order.
fn pivots(m: DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    let r = m.col_piv_qr().r();
    (0..k).map(|i| r[(i, i)].abs()).collect()
}

/// Numerical rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let cols = first.len();
    if cols == 0 {
        return 0;
    }
    // Rank is invariant under transposition; QR on the tall orientation.
    let m = if rows.len() >= cols {
        matrix_from_rows(rows, cols)
    } else {
        matrix_from_rows(rows, cols).transpose()
    };
    let p = pivots(m);
    let scale = p.first().copied().unwrap_or(0.0).max(1.0);
    p.iter().filter(|&&x| x > tol * scale).count()
}

/// Affine rank of a point set: rank of the differences to the first point.
/// Returns -1 for the empty set.
pub fn affine_rank(points: &[Vec<f64>], tol: f64) -> i32 {
    let Some(base) = points.first() else {
        return -1;
    };
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(x, b)| x - b).collect())
        .collect();
    rank(&diffs, tol) as i32
}

/// Solves the square system `rows · x = rhs`, or `None` when it is
/// numerically singular.
pub fn solve_square(rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = rows.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let m = matrix_from_rows(rows, n);
    let qr = m.col_piv_qr();
    let r = qr.r();
    let scale = r[(0, 0)].abs().max(1.0);
    if (0..n).any(|i| r[(i, i)].abs() <= tol * scale) {
        return None;
    }
    let x = qr.solve(&DVector::from_column_slice(rhs))?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// Exact solution of `Σ_i x_i columns[i] = rhs` for linearly independent
/// columns, or `None` when the columns are dependent or the system is
/// inconsistent beyond `tol`.
pub fn solve_columns(columns: &[Vec<f64>], rhs: &[f64], tol: f64) -> Option<Vec<f64>> {
    let k = columns.len();
    let n = rhs.len();
    if k == 0 || k > n || rank(columns, tol) < k {
        return None;
    }
    let m = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(rhs);
    let x = m.clone().svd(true, true).solve(&b, tol).ok()?;
    let resid = (&m * &x - &b).amax();
    (resid <= tol.max(1e-12) * 10.0).then(|| x.iter().copied().collect())
}

/// A unit vector `z` with `Σ z_i columns[i] ≈ 0`, or `None` when the columns
/// are independent. Used to shrink the support of a signal policy.
pub fn null_combination(columns: &[Vec<f64>], tol: f64) -> Option<Vec<f64>> {
    let k = columns.len();
    if k == 0 {
        return None;
    }
    let n = columns[0].len();
    if rank(columns, tol) == k {
        return None;
    }
    // Pad to square so the SVD exposes the whole right null space.
    let size = k.max(n);
    let m = DMatrix::from_fn(size, k, |i, j| if i < n { columns[j][i] } else { 0.0 });
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    Some(v_t.row(idx).iter().copied().collect())
}

/// Orthogonal projection of `x` onto `{y : eq_rows · y = eq_rhs}`. The rows
/// must be linearly independent.
pub fn project_affine(x: &[f64], eq_rows: &[Vec<f64>], eq_rhs: &[f64]) -> Option<Vec<f64>> {
    let k = eq_rows.len();
    if k == 0 {
        return Some(x.to_vec());
    }
    let n = x.len();
    let a = matrix_from_rows(eq_rows, n);
    let xv = DVector::from_column_slice(x);
    let resid = &a * &xv - DVector::from_column_slice(eq_rhs);
    let gram = &a * a.transpose();
    let lambda = gram.cholesky()?.solve(&resid);
    let y = xv - a.transpose() * lambda;
    Some(y.iter().copied().collect())
}
