//! Dense least squares via Householder QR.
//!
//! Columns are processed left to right; a column whose remaining norm falls
//! below `sqrt(eps)` of its original norm is treated as linearly dependent on
//! the columns before it and dropped. Callers decide whether a dropped column
//! is an error.

use crate::error::{Error, Result};
use crate::scalar::{rank_tolerance, Scalar};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidArgument("design columns differ in length".into()));
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("design rows differ in length".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for j in 0..cols {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    pub fn mul_vec(&self, beta: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows];
        for (j, &b) in beta.iter().enumerate() {
            if b == T::zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.column(j)) {
                *o = *o + x * b;
            }
        }
        out
    }
}

/// Least-squares solution with rank information.
#[derive(Debug, Clone)]
pub(crate) struct LeastSquares<T> {
    /// One entry per design column; dropped columns get zero.
    pub coefficients: Vec<T>,
    /// Indices of retained columns, ascending.
    pub kept: Vec<usize>,
    /// Diagonal of `(X'X)^{-1}` for retained columns, aligned with `kept`.
    pub inverse_gram_diagonal: Vec<T>,
}

impl<T> LeastSquares<T> {
    pub fn is_full_rank(&self, cols: usize) -> bool {
        self.kept.len() == cols
    }
}

pub(crate) fn least_squares<T: Scalar>(x: &Matrix<T>, y: &[T]) -> Result<LeastSquares<T>> {
    let (n, p) = (x.rows, x.cols);
    if y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "design has {n} rows but response has {} values",
            y.len()
        )));
    }
    let tol = rank_tolerance::<T>();
    let mut a: Vec<Vec<T>> = (0..p).map(|j| x.column(j).to_vec()).collect();
    let mut b = y.to_vec();
    let orig_norms: Vec<T> = a.iter().map(|c| norm(c)).collect();

    let mut kept = Vec::new();
    for j in 0..p {
        let r = kept.len();
        if r >= n {
            break;
        }
        let tail_norm = norm(&a[j][r..]);
        if orig_norms[j] == T::zero() || tail_norm <= tol * orig_norms[j] {
            continue;
        }
        let x0 = a[j][r];
        let alpha = if x0 >= T::zero() { -tail_norm } else { tail_norm };
        let mut v: Vec<T> = a[j][r..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, &e| s + e * e);
        if vnorm2 > T::zero() {
            let reflect = |col: &mut [T]| {
                let dot = v.iter().zip(col.iter()).fold(T::zero(), |s, (&vi, &ci)| s + vi * ci);
                let f = (dot + dot) / vnorm2;
                for (c, &vi) in col.iter_mut().zip(&v) {
                    *c = *c - f * vi;
                }
            };
            for col in a.iter_mut().skip(j + 1) {
                reflect(&mut col[r..]);
            }
            reflect(&mut b[r..]);
        }
        a[j][r] = alpha;
        for e in &mut a[j][r + 1..] {
            *e = T::zero();
        }
        kept.push(j);
    }

    let k = kept.len();
    // Upper-triangular R over kept columns: R[i][c] = a[kept[c]][i].
    let rmat = |i: usize, c: usize| a[kept[c]][i];
    let mut beta_kept = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for c in i + 1..k {
            s = s - rmat(i, c) * beta_kept[c];
        }
        beta_kept[i] = s / rmat(i, i);
    }

    // R^{-1} column by column; diag((X'X)^{-1}) = row sums of squares of R^{-1}.
    let mut rinv = vec![vec![T::zero(); k]; k];
    for c in 0..k {
        rinv[c][c] = T::one() / rmat(c, c);
        for i in (0..c).rev() {
            let mut s = T::zero();
            for l in i + 1..=c {
                s = s + rmat(i, l) * rinv[l][c];
            }
            rinv[i][c] = -s / rmat(i, i);
        }
    }
    let inverse_gram_diagonal = (0..k)
        .map(|i| rinv[i].iter().fold(T::zero(), |s, &e| s + e * e))
        .collect();

    let mut coefficients = vec![T::zero(); p];
    for (c, &j) in kept.iter().enumerate() {
        coefficients[j] = beta_kept[c];
    }
    Ok(LeastSquares {
        coefficients,
        kept,
        inverse_gram_diagonal,
    })
}

fn norm<T: Scalar>(v: &[T]) -> T {
    // Scaled to avoid overflow for large magnitudes.
    let scale = v.iter().fold(T::zero(), |m, &e| m.max(e.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s = v.iter().fold(T::zero(), |s, &e| {
        let q = e / scale;
        s + q * q
    });
    scale * s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        let x = Matrix::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 3.0]]).unwrap();
        let ls = least_squares(&x, &[5.0, 10.0]).unwrap();
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 3.0).abs() < 1e-12);
        // (X'X)^{-1} = [[10, -5], [-5, 5]] / 25
        assert!((ls.inverse_gram_diagonal[0] - 0.4).abs() < 1e-12);
        assert!((ls.inverse_gram_diagonal[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn drops_dependent_column() {
        let x = Matrix::from_columns(&[vec![1.0f64; 4], vec![0.0, 1.0, 2.0, 3.0], vec![2.0; 4]]).unwrap();
        let ls = least_squares(&x, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert_eq!(ls.kept, [0, 1]);
        assert!(!ls.is_full_rank(3));
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
        assert_eq!(ls.coefficients[2], 0.0);
    }

    #[test]
    fn matrix_layouts_agree() {
        let a = Matrix::from_rows(&[vec![1.0f64, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = Matrix::from_columns(&[vec![1.0, 3.0, 5.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(2, 1), 6.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), [3.0, 7.0, 11.0]);
    }
}
