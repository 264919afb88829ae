use std::sync::Arc;

use super::domain::PerturbBox;
use super::interval::Interval;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One affine side `coeffs · x + bias` over the box variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBound<S> {
    pub coeffs: Vec<S>,
    pub bias: S,
}

impl<S: Scalar> LinearBound<S> {
    pub fn constant(dim: usize, v: S) -> Self {
        Self { coeffs: vec![S::zero(); dim], bias: v }
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.coeffs.iter().zip(x).fold(self.bias, |acc, (&a, &xi)| acc + a * xi)
    }

    /// Minimum over the box: each coefficient picks the box end that lowers it.
    pub fn min_over(&self, domain: &PerturbBox<S>) -> S {
        self.coeffs.iter().zip(domain.vars()).fold(self.bias, |acc, (&a, v)| {
            acc + if a >= S::zero() { a * v.lo } else { a * v.hi }
        })
    }

    pub fn max_over(&self, domain: &PerturbBox<S>) -> S {
        self.coeffs.iter().zip(domain.vars()).fold(self.bias, |acc, (&a, v)| {
            acc + if a >= S::zero() { a * v.hi } else { a * v.lo }
        })
    }

    pub fn is_flat(&self) -> bool {
        self.coeffs.iter().all(|&a| a == S::zero())
    }

    pub(crate) fn scaled(&self, c: S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
            bias: self.bias * c,
        }
    }

    /// `self += c * other`
    pub(crate) fn add_scaled(&mut self, other: &Self, c: S) {
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + c * b;
        }
        self.bias = self.bias + c * other.bias;
    }
}

/// Sound affine lower/upper bounds of a scalar quantity over a perturbation box:
/// `lower(x) <= y(x) <= upper(x)` for every `x` in the box.
///
/// The concretized range is computed once at construction. Relaxations may
/// tighten it with an independently sound interval enclosure.
#[derive(Debug, Clone)]
pub struct AffineForm<S> {
    domain: Arc<PerturbBox<S>>,
    lower: LinearBound<S>,
    upper: LinearBound<S>,
    range: Interval<S>,
}

impl<S: Scalar> AffineForm<S> {
    pub fn from_bounds(domain: Arc<PerturbBox<S>>, lower: LinearBound<S>, upper: LinearBound<S>) -> Self {
        debug_assert_eq!(lower.coeffs.len(), domain.dim());
        debug_assert_eq!(upper.coeffs.len(), domain.dim());
        let range = Interval::new(lower.min_over(&domain), upper.max_over(&domain));
        Self { domain, lower, upper, range }
    }

    /// Intersects the cached range with another sound enclosure of the same quantity.
    pub fn with_range_hint(mut self, hint: Interval<S>) -> Self {
        if let Some(r) = self.range.intersect(&hint) {
            self.range = r;
        }
        self
    }

    pub fn domain(&self) -> &Arc<PerturbBox<S>> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn lower(&self) -> &LinearBound<S> {
        &self.lower
    }

    pub fn upper(&self) -> &LinearBound<S> {
        &self.upper
    }

    pub fn range(&self) -> Interval<S> {
        self.range
    }

    /// Zero-slope form with equal sides.
    pub fn constant_value(&self) -> Option<S> {
        (self.lower.is_flat() && self.upper.is_flat() && self.lower.bias == self.upper.bias)
            .then_some(self.lower.bias)
    }

    pub fn eval_lower(&self, x: &[S]) -> S {
        self.lower.eval(x)
    }

    pub fn eval_upper(&self, x: &[S]) -> S {
        self.upper.eval(x)
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub(crate) fn check_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::BoxMismatch)
        }
    }
}
