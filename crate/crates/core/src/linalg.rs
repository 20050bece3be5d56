//! Small dense helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

const EIGEN_MAX_ITER: usize = 100_000;

pub type Matrix = DMatrix<f64>;

pub(crate) fn ensure_finite(x: &Matrix) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
///
/// Each eigenvector's sign is fixed so that its largest-magnitude component is positive.
pub fn sym_eigen_desc(m: &Matrix) -> Result<(DVector<f64>, Matrix)> {
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), Matrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence("symmetric eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for r in 1..n {
            if libm::fabs(col[r]) > libm::fabs(col[pivot]) {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, dst)] = sign * col[r];
        }
    }
    Ok((values, vectors))
}

/// Thin SVD `m = U diag(s) Vᵀ`, returning `(U, s, Vᵀ)`.
pub fn svd(m: &Matrix) -> Result<(Matrix, DVector<f64>, Matrix)> {
    ensure_finite(m)?;
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::NoConvergence("singular value decomposition"))?;
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok((u, svd.singular_values, v_t)),
        _ => Err(Error::NoConvergence("singular value decomposition")),
    }
}

pub fn row_norm(m: &Matrix, i: usize) -> f64 {
    libm::sqrt(m.row(i).iter().map(|v| v * v).sum())
}

/// Scales every nonzero row to unit L2 norm.
pub fn normalize_rows(m: &mut Matrix) {
    for i in 0..m.nrows() {
        let n = row_norm(m, i);
        if n > 0.0 {
            m.row_mut(i).unscale_mut(n);
        }
    }
}

/// Column means over the given rows (all rows when `rows` is `None`).
pub fn column_means(m: &Matrix, rows: Option<&[usize]>) -> DVector<f64> {
    let d = m.ncols();
    let mut mean = DVector::zeros(d);
    let count = match rows {
        Some(rows) => {
            for &r in rows {
                for c in 0..d {
                    mean[c] += m[(r, c)];
                }
            }
            rows.len()
        }
        None => {
            for c in 0..d {
                mean[c] = m.column(c).iter().sum();
            }
            m.nrows()
        }
    };
    if count > 0 {
        mean.unscale_mut(count as f64);
    }
    mean
}

pub fn subtract_row_vector(m: &mut Matrix, v: &DVector<f64>) {
    for c in 0..m.ncols() {
        let offset = v[c];
        for r in 0..m.nrows() {
            m[(r, c)] -= offset;
        }
    }
}

/// Stacks `a` on top of `b`.
pub fn stack_rows(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(shape_error(a, b));
    }
    let mut out = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    Ok(out)
}

/// Splits `m` after its first `top` rows.
pub fn split_rows(m: &Matrix, top: usize) -> (Matrix, Matrix) {
    (m.rows(0, top).into_owned(), m.rows(top, m.nrows() - top).into_owned())
}

/// Copies the listed rows into a new matrix.
pub fn select_rows(m: &Matrix, rows: impl ExactSizeIterator<Item = usize>) -> Matrix {
    let n = rows.len();
    let mut out = Matrix::zeros(n, m.ncols());
    for (dst, src) in rows.enumerate() {
        out.row_mut(dst).copy_from(&m.row(src));
    }
    out
}

pub(crate) fn shape_error(a: &Matrix, b: &Matrix) -> Error {
    Error::ShapeMismatch {
        left_rows: a.nrows(),
        left_cols: a.ncols(),
        right_rows: b.nrows(),
        right_cols: b.ncols(),
    }
}
