//! Matrix-shaped relaxations over [`Matrix`] of affine forms and of intervals.

use std::sync::Arc;

use super::domain::PerturbBox;
use super::form::AffineForm;
use super::interval::Interval;
use super::ops::{constant, relax_mul, sum};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub type FormMatrix<S> = Matrix<AffineForm<S>>;
pub type IntervalMatrix<S> = Matrix<Interval<S>>;

pub fn constant_matrix<S: Scalar>(m: &Matrix<S>, domain: &Arc<PerturbBox<S>>) -> FormMatrix<S> {
    m.map(|&v| constant(v, domain))
}

pub fn concretize_matrix<S: Scalar>(m: &FormMatrix<S>) -> IntervalMatrix<S> {
    m.map(|f| f.range())
}

/// Entry `(i, j)` is the ascending-`k` sum of `relax_mul(F[i,k], G[k,j])`.
pub fn relax_matmul<S: Scalar>(f: &FormMatrix<S>, g: &FormMatrix<S>) -> Result<FormMatrix<S>> {
    if f.cols() != g.rows() {
        return Err(Error::ShapeMismatch(format!("{:?} x {:?}", f.shape(), g.shape())));
    }
    let domain = match (f.as_slice().first(), g.as_slice().first()) {
        (Some(a), Some(b)) => {
            a.check_domain(b)?;
            a.domain().clone()
        }
        _ => return Err(Error::ShapeMismatch("empty operand".into())),
    };
    let mut data = Vec::with_capacity(f.rows() * g.cols());
    for i in 0..f.rows() {
        for j in 0..g.cols() {
            let terms = (0..f.cols())
                .map(|k| relax_mul(&f[(i, k)], &g[(k, j)]))
                .collect::<Result<Vec<_>>>()?;
            data.push(sum(&terms, &domain)?);
        }
    }
    Matrix::from_vec(f.rows(), g.cols(), data)
}

pub fn interval_matmul<S: Scalar>(a: &IntervalMatrix<S>, b: &IntervalMatrix<S>) -> Result<IntervalMatrix<S>> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch(format!("{:?} x {:?}", a.shape(), b.shape())));
    }
    Ok(Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).fold(Interval::point(S::zero()), |acc, k| acc + a[(i, k)] * b[(k, j)])
    }))
}

pub fn interval_from_points<S: Scalar>(m: &Matrix<S>) -> IntervalMatrix<S> {
    m.map(|&v| Interval::point(v))
}

/// Enclosure of the Frobenius norm over every matrix in `m`.
pub fn interval_norm_fro<S: Scalar>(m: &IntervalMatrix<S>) -> Interval<S> {
    let lo: S = m.iter().map(|e| e.mag_min() * e.mag_min()).sum();
    let hi: S = m.iter().map(|e| e.mag_max() * e.mag_max()).sum();
    Interval { lo: lo.sqrt(), hi: hi.sqrt() }
}
