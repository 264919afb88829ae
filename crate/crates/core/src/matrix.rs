//! Small dense row-major matrix used for points, intervals and affine forms alike.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows<const C: usize>(rows: Vec<[T; C]>) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect();
        Self { rows: n, cols: C, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&T> {
        (r < self.rows && c < self.cols).then(|| &self.data[r * self.cols + c])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Matrix<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Matrix<V>> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> std::result::Result<U, E>) -> std::result::Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<std::result::Result<_, _>>()?,
        })
    }
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn row(&self, r: usize) -> Vec<T> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Point-matrix arithmetic. Only what the renderer and the inverse enclosure need.
pub mod point {
    use super::Matrix;
    use crate::error::{Error, Result};
    use crate::scalar::Scalar;

    pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
        Matrix::from_fn(n, n, |r, c| if r == c { S::one() } else { S::zero() })
    }

    pub fn matmul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
        if a.cols() != b.rows() {
            return Err(Error::ShapeMismatch(format!("{:?} x {:?}", a.shape(), b.shape())));
        }
        Ok(Matrix::from_fn(a.rows(), b.cols(), |r, c| {
            (0..a.cols()).map(|k| a[(r, k)] * b[(k, c)]).sum()
        }))
    }

    pub fn frobenius<S: Scalar>(a: &Matrix<S>) -> S {
        a.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>> {
        if !a.is_square() {
            return Err(Error::ShapeMismatch(format!("inverse of {:?}", a.shape())));
        }
        let n = a.rows();
        let mut m = a.clone();
        let mut inv = identity::<S>(n);
        let scale = a.iter().fold(S::zero(), |acc, v| acc.max(v.abs()));
        if scale == S::zero() || !scale.is_finite() {
            return Err(Error::SingularReference);
        }
        let tiny = scale * S::epsilon() * S::lit(n as f64);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| m[(x, col)].abs().partial_cmp(&m[(y, col)].abs()).unwrap())
                .unwrap();
            if m[(pivot, col)].abs() <= tiny {
                return Err(Error::SingularReference);
            }
            if pivot != col {
                for c in 0..n {
                    let (p, q) = (m[(pivot, c)], m[(col, c)]);
                    m[(pivot, c)] = q;
                    m[(col, c)] = p;
                    let (p, q) = (inv[(pivot, c)], inv[(col, c)]);
                    inv[(pivot, c)] = q;
                    inv[(col, c)] = p;
                }
            }
            let d = m[(col, col)];
            for c in 0..n {
                m[(col, c)] = m[(col, c)] / d;
                inv[(col, c)] = inv[(col, c)] / d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m[(r, col)];
                if f == S::zero() {
                    continue;
                }
                for c in 0..n {
                    m[(r, c)] = m[(r, c)] - f * m[(col, c)];
                    inv[(r, c)] = inv[(r, c)] - f * inv[(col, c)];
                }
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_2x2() {
        let a = Matrix::from_rows(vec![[4.0, 7.0], [2.0, 6.0]]);
        let inv = point::inverse(&a).unwrap();
        let prod = point::matmul(&a, &inv).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let e: f64 = if r == c { 1.0 } else { 0.0 };
                assert!((prod[(r, c)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_is_rejected() {
        let a = Matrix::from_rows(vec![[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(point::inverse(&a), Err(Error::SingularReference)));
    }

    #[test]
    fn wrong_length_is_error() {
        assert!(Matrix::from_vec(2, 2, vec![1.0; 3]).is_err());
    }
}
