//! Enclosures of the matrix inverse by a truncated Neumann series around a
//! reference inverse `X0`:
//!
//! `X⁻¹ = X0 · Σ_{i≥0} (I − X·X0)^i`, valid while `‖I − X·X0‖ < 1`.
//!
//! The first `k + 1` terms are evaluated in interval arithmetic (or by affine
//! bound propagation) and the tail is covered by the remainder radius
//! `eps = ‖X0‖ · ‖I − X·X0‖^{k+1} / (1 − ‖I − X·X0‖)`, which bounds every entry
//! of the tail because the Frobenius norm dominates each entry.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{point, Matrix};
use crate::relax::{
    AffineForm,
    affine_compose, concretize_matrix, constant_matrix, interval_from_points, interval_matmul,
    interval_norm_fro, relax_div, relax_matmul, relax_mul, scale, sub, sum, FormMatrix, Interval, IntervalMatrix,
    PerturbBox,
};
use crate::scalar::Scalar;

pub const DEFAULT_ORDER: usize = 8;
pub const DEFAULT_MAX_ORDER: usize = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Taylor-order selection for the enclosure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvOptions<S> {
    /// Minimum order.
    pub k: usize,
    /// Target remainder radius; the order is raised until `eps < tol` or `k_max`.
    pub tol: S,
    pub k_max: usize,
    #[doc(hidden)]
    pub skip_eps: bool,
}

impl<S: Scalar> Default for InvOptions<S> {
    fn default() -> Self {
        Self {
            k: DEFAULT_ORDER,
            tol: S::lit(DEFAULT_TOLERANCE),
            k_max: DEFAULT_MAX_ORDER,
            skip_eps: false,
        }
    }
}

impl<S: Scalar> InvOptions<S> {
    pub fn fixed(k: usize) -> Self {
        Self { k, tol: S::infinity(), k_max: k, skip_eps: false }
    }
}

#[derive(Debug, Clone)]
pub struct InvEnclosure<S> {
    pub lower: Matrix<S>,
    pub upper: Matrix<S>,
    pub eps: S,
    pub k_used: usize,
    pub reference: Matrix<S>,
    /// Upper bound of `‖I − X·X0‖_F`.
    pub contraction: S,
    /// `false` when `k_max` was reached with `eps >= tol`.
    pub converged: bool,
}

impl<S: Scalar> InvEnclosure<S> {
    pub fn as_intervals(&self) -> IntervalMatrix<S> {
        Matrix::from_fn(self.lower.rows(), self.lower.cols(), |r, c| {
            Interval::new(self.lower[(r, c)], self.upper[(r, c)])
        })
    }

    pub fn width(&self) -> S {
        enclosure_width(&self.as_intervals())
    }

    pub fn contains(&self, m: &Matrix<S>, slack: S) -> bool {
        m.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }
}

/// `‖upper − lower‖_F` of an interval matrix.
pub fn enclosure_width<S: Scalar>(m: &IntervalMatrix<S>) -> S {
    m.iter().map(|e| e.width() * e.width()).sum::<S>().sqrt()
}

/// Remainder radius after `k + 1` series terms.
pub fn remainder_radius<S: Scalar>(reference_norm: S, contraction: S, k: usize) -> S {
    let tail = contraction.powi(k as i32 + 1);
    let inv_gap = Interval::point(S::one() - contraction)
        .recip()
        .map(|iv| iv.hi)
        .unwrap_or(S::infinity());
    reference_norm * tail * inv_gap
}

/// Smallest order `>= opts.k` meeting the tolerance, capped at `opts.k_max`.
fn choose_order<S: Scalar>(reference_norm: S, contraction: S, opts: &InvOptions<S>) -> (usize, bool) {
    let mut k = opts.k;
    loop {
        let ok = remainder_radius(reference_norm, contraction, k) < opts.tol;
        if ok || k >= opts.k_max {
            return (k, ok);
        }
        k += 1;
    }
}

fn check_square<T>(x: &Matrix<T>, x0_shape: (usize, usize)) -> Result<usize> {
    if !x.is_square() || x.shape() != x0_shape {
        return Err(Error::ShapeMismatch(format!("input {:?}, reference {:?}", x.shape(), x0_shape)));
    }
    Ok(x.rows())
}

fn deviation<S: Scalar>(x: &IntervalMatrix<S>, x0: &Matrix<S>) -> Result<IntervalMatrix<S>> {
    let xx0 = interval_matmul(x, &interval_from_points(x0))?;
    let n = x.rows();
    Ok(Matrix::from_fn(n, n, |r, c| {
        let id = if r == c { S::one() } else { S::zero() };
        Interval::point(id) - xx0[(r, c)]
    }))
}

/// Interval enclosure with an explicit order; use [`matrix_inv_enclose_with`] for
/// tolerance-driven order selection.
pub fn matrix_inv_enclose<S: Scalar>(x: &IntervalMatrix<S>, x0: &Matrix<S>, k: usize) -> Result<InvEnclosure<S>> {
    matrix_inv_enclose_with(x, x0, &InvOptions::fixed(k))
}

pub fn matrix_inv_enclose_with<S: Scalar>(
    x: &IntervalMatrix<S>,
    x0: &Matrix<S>,
    opts: &InvOptions<S>,
) -> Result<InvEnclosure<S>> {
    let n = check_square(x, x0.shape())?;
    point::inverse(x0)?;
    let e = deviation(x, x0)?;
    let contraction = interval_norm_fro(&e).hi;
    if !(contraction < S::one()) {
        return Err(Error::ContractionViolated { norm: contraction.as_f64() });
    }
    let x0_norm = point::frobenius(x0);
    let (k, converged) = choose_order(x0_norm, contraction, opts);

    let mut power = interval_from_points(&point::identity::<S>(n));
    let mut series = power.clone();
    for _ in 0..k {
        power = interval_matmul(&power, &e)?;
        series = series.zip_map(&power, |&a, &b| a + b)?;
    }
    let xp = interval_matmul(&interval_from_points(x0), &series)?;
    let eps = if opts.skip_eps { S::zero() } else { remainder_radius(x0_norm, contraction, k) };
    Ok(InvEnclosure {
        lower: xp.map(|iv| iv.lo - eps),
        upper: xp.map(|iv| iv.hi + eps),
        eps,
        k_used: k,
        reference: x0.clone(),
        contraction,
        converged,
    })
}

/// Reference inverse: inverse of the interval midpoint matrix.
pub fn center_reference<S: Scalar>(x: &IntervalMatrix<S>) -> Result<Matrix<S>> {
    point::inverse(&x.map(|iv| iv.mid()))
}

/// Interval enclosure with `X0 = inv(center)` and the smallest order `<= k_max`
/// whose remainder radius is below `tol`.
pub fn auto_tune<S: Scalar>(x: &IntervalMatrix<S>, tol: S, k_max: usize) -> Result<InvEnclosure<S>> {
    let x0 = center_reference(x)?;
    let opts = InvOptions { k: 0, tol, k_max, skip_eps: false };
    let enc = matrix_inv_enclose_with(x, &x0, &opts)?;
    if !enc.converged {
        log::warn!(
            "inverse enclosure did not reach tolerance {} by order {} (eps {})",
            tol,
            k_max,
            enc.eps
        );
    }
    Ok(enc)
}

/// Affine enclosure: lower side `Xp − eps` and upper side `Xp + eps`.
#[derive(Debug, Clone)]
pub struct AffineInvEnclosure<S> {
    pub lower_side: FormMatrix<S>,
    pub upper_side: FormMatrix<S>,
    pub eps: S,
    pub k_used: usize,
    pub reference: Matrix<S>,
    pub contraction: S,
    pub converged: bool,
}

impl<S: Scalar> AffineInvEnclosure<S> {
    /// Lower bound of the lower side with the upper bound of the upper side.
    pub fn union(&self) -> FormMatrix<S> {
        Matrix::from_fn(self.lower_side.rows(), self.lower_side.cols(), |r, c| {
            let lo = &self.lower_side[(r, c)];
            let hi = &self.upper_side[(r, c)];
            let range = Interval::new(lo.range().lo, hi.range().hi);
            AffineForm::from_bounds(lo.domain().clone(), lo.lower().clone(), hi.upper().clone())
                .with_range_hint(range)
        })
    }
}

/// Runs the series with affine forms. `X0` is the inverse of the center of the
/// concretized input and the remainder is a constant widening.
///
/// The contraction bound comes from the affine deviation `I − X·X0`, which keeps
/// the correlation between entries of `X` and is often far below the bound from
/// the concretized input. When the interval enclosure of the concretized input
/// also exists, each entry's range is intersected with it.
pub fn matrix_inv_enclose_affine<S: Scalar>(x: &FormMatrix<S>, opts: &InvOptions<S>) -> Result<AffineInvEnclosure<S>> {
    if !x.is_square() || x.rows() == 0 {
        return Err(Error::ShapeMismatch(format!("inverse of {:?}", x.shape())));
    }
    let n = x.rows();
    let domain: Arc<PerturbBox<S>> = x[(0, 0)].domain().clone();
    let ranges = concretize_matrix(x);
    let x0 = center_reference(&ranges)?;

    let x0f = constant_matrix(&x0, &domain);
    let xx0 = relax_matmul(x, &x0f)?;
    let mut e = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let id = if r == c { S::one() } else { S::zero() };
            e.push(affine_compose(&[-S::one()], id, &[&xx0[(r, c)]])?);
        }
    }
    let e = Matrix::from_vec(n, n, e)?;
    let contraction = interval_norm_fro(&concretize_matrix(&e)).hi;
    if !(contraction < S::one()) {
        return Err(Error::ContractionViolated { norm: contraction.as_f64() });
    }
    let x0_norm = point::frobenius(&x0);
    let (k, converged) = choose_order(x0_norm, contraction, opts);
    let interval = matrix_inv_enclose_with(&ranges, &x0, &InvOptions { k, tol: opts.tol, k_max: k, skip_eps: opts.skip_eps }).ok();

    let mut power = constant_matrix(&point::identity::<S>(n), &domain);
    let mut series = power.clone();
    for _ in 0..k {
        power = relax_matmul(&power, &e)?;
        let mut next = Vec::with_capacity(n * n);
        for (a, b) in series.iter().zip(power.iter()) {
            next.push(sum(&[a.clone(), b.clone()], &domain)?);
        }
        series = Matrix::from_vec(n, n, next)?;
    }
    let xp = relax_matmul(&x0f, &series)?;
    let eps = if opts.skip_eps { S::zero() } else { remainder_radius(x0_norm, contraction, k) };
    let widen = |sign: S| -> Result<FormMatrix<S>> {
        let mut out = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mut f = affine_compose(&[S::one()], sign * eps, &[&xp[(r, c)]])?;
                if let Some(iv) = &interval {
                    f = f.with_range_hint(Interval::new(iv.lower[(r, c)], iv.upper[(r, c)]));
                }
                out.push(f);
            }
        }
        Matrix::from_vec(n, n, out)
    };
    Ok(AffineInvEnclosure {
        lower_side: widen(-S::one())?,
        upper_side: widen(S::one())?,
        eps,
        k_used: k,
        reference: x0,
        contraction,
        converged,
    })
}

fn det_2x2_interval<S: Scalar>(x: &IntervalMatrix<S>) -> Result<Interval<S>> {
    if x.shape() != (2, 2) {
        return Err(Error::ShapeMismatch(format!("adjugate inverse needs 2x2, got {:?}", x.shape())));
    }
    Ok(x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)])
}

/// `adj(X) / det(X)` in plain interval arithmetic.
pub fn adjugate_inverse_interval<S: Scalar>(x: &IntervalMatrix<S>) -> Result<IntervalMatrix<S>> {
    let det = det_2x2_interval(x)?;
    let r = det
        .recip()
        .ok_or(Error::DeterminantStraddlesZero { lo: det.lo.as_f64(), hi: det.hi.as_f64() })?;
    let adj = Matrix::from_rows(vec![[x[(1, 1)], -x[(0, 1)]], [-x[(1, 0)], x[(0, 0)]]]);
    Ok(adj.map(|&e| e * r))
}

/// `adj(X) / det(X)` by affine bound propagation, with the reciprocal of the
/// determinant relaxed by the tangent/chord division rule.
pub fn adjugate_inverse_affine<S: Scalar>(x: &FormMatrix<S>) -> Result<FormMatrix<S>> {
    if x.shape() != (2, 2) {
        return Err(Error::ShapeMismatch(format!("adjugate inverse needs 2x2, got {:?}", x.shape())));
    }
    let det = sub(&relax_mul(&x[(0, 0)], &x[(1, 1)])?, &relax_mul(&x[(0, 1)], &x[(1, 0)])?)?;
    let dr = det.range();
    if dr.lo <= S::zero() && dr.hi >= S::zero() {
        return Err(Error::DeterminantStraddlesZero { lo: dr.lo.as_f64(), hi: dr.hi.as_f64() });
    }
    let recip = if dr.lo > S::zero() {
        relax_div(&det)?
    } else {
        scale(&relax_div(&scale(&det, -S::one()))?, -S::one())
    };
    let adj = [
        x[(1, 1)].clone(),
        scale(&x[(0, 1)], -S::one()),
        scale(&x[(1, 0)], -S::one()),
        x[(0, 0)].clone(),
    ];
    let out = adj.iter().map(|e| relax_mul(e, &recip)).collect::<Result<Vec<_>>>()?;
    Matrix::from_vec(2, 2, out)
}
