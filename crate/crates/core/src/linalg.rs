//! Small dense linear solvers used by the surrogate explainers.
//!
//! Systems here are tiny (one or two rows per segment), so a hand-rolled
//! Gaussian elimination with partial pivoting is exact enough and keeps the
//! crate free of a LAPACK backend.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Solve `a * x = b` in place via Gaussian elimination with partial pivoting.
pub fn solve<S: Scalar>(a: &mut Array2<S>, b: &mut [S]) -> Result<Vec<S>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::InvalidInput(format!(
            "solve expects square system, got {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let scale = a.iter().fold(S::zero(), |m, &v| m.max(v.abs()));
    let tiny = if scale > S::zero() {
        scale * S::epsilon() * lit::<S>(n as f64)
    } else {
        S::epsilon()
    };

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[[col, col]].abs();
        for row in (col + 1)..n {
            let v = a[[row, col]].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= tiny {
            return Err(Error::IllConditioned(format!(
                "pivot {pivot_val} at column {col} (scale {scale})"
            )));
        }
        if pivot_row != col {
            for k in 0..n {
                let tmp = a[[col, k]];
                a[[col, k]] = a[[pivot_row, k]];
                a[[pivot_row, k]] = tmp;
            }
            b.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let factor = a[[row, col]] / a[[col, col]];
            if factor == S::zero() {
                continue;
            }
            for k in col..n {
                let v = a[[col, k]];
                a[[row, k]] = a[[row, k]] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }

    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc = acc - a[[row, k]] * x[k];
        }
        x[row] = acc / a[[row, row]];
    }
    Ok(x)
}

/// Weighted least squares with a ridge penalty on every coefficient except
/// the first (the intercept). `x` is n_rows x n_coefs, column 0 = intercept.
pub fn weighted_ridge_ls<S: Scalar>(
    x: &Array2<S>,
    y: &[S],
    w: &[S],
    ridge: S,
) -> Result<Vec<S>> {
    let (rows, cols) = (x.nrows(), x.ncols());
    if y.len() != rows || w.len() != rows {
        return Err(Error::InvalidInput(
            "weighted_ridge_ls: row count mismatch".into(),
        ));
    }
    let mut normal = Array2::<S>::zeros((cols, cols));
    let mut rhs = vec![S::zero(); cols];
    for r in 0..rows {
        let wr = w[r];
        for i in 0..cols {
            let xi = x[[r, i]];
            rhs[i] = rhs[i] + wr * xi * y[r];
            for j in 0..cols {
                normal[[i, j]] = normal[[i, j]] + wr * xi * x[[r, j]];
            }
        }
    }
    for i in 1..cols {
        normal[[i, i]] = normal[[i, i]] + ridge;
    }
    solve(&mut normal, &mut rhs)
}

/// Weighted least squares subject to exact equality constraints `c * theta = d`,
/// solved through the stationarity system of the Lagrangian.
pub fn constrained_weighted_ls<S: Scalar>(
    x: &Array2<S>,
    y: &[S],
    w: &[S],
    c: &Array2<S>,
    d: &[S],
) -> Result<Vec<S>> {
    let (rows, cols) = (x.nrows(), x.ncols());
    let m = c.nrows();
    if c.ncols() != cols || d.len() != m || y.len() != rows || w.len() != rows {
        return Err(Error::InvalidInput(
            "constrained_weighted_ls: dimension mismatch".into(),
        ));
    }
    let dim = cols + m;
    let mut kkt = Array2::<S>::zeros((dim, dim));
    let mut rhs = vec![S::zero(); dim];
    let two = lit::<S>(2.0);
    for r in 0..rows {
        let wr = w[r];
        for i in 0..cols {
            let xi = x[[r, i]];
            rhs[i] = rhs[i] + two * wr * xi * y[r];
            for j in 0..cols {
                kkt[[i, j]] = kkt[[i, j]] + two * wr * xi * x[[r, j]];
            }
        }
    }
    for k in 0..m {
        for j in 0..cols {
            kkt[[j, cols + k]] = c[[k, j]];
            kkt[[cols + k, j]] = c[[k, j]];
        }
        rhs[cols + k] = d[k];
    }
    let full = solve(&mut kkt, &mut rhs)?;
    Ok(full[..cols].to_vec())
}
