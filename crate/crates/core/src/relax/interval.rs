use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Closed interval `[lo, hi]`. Vector and matrix intervals are componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    /// Builds `[lo, hi]`, ordering the endpoints if they arrive swapped.
    pub fn new(lo: S, hi: S) -> Self {
        if lo <= hi {
            Self { lo, hi }
        } else {
            Self { lo: hi, hi: lo }
        }
    }

    pub fn point(v: S) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn unit() -> Self {
        Self { lo: S::zero(), hi: S::one() }
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    pub fn mid(&self) -> S {
        self.lo + (self.hi - self.lo) * S::half()
    }

    pub fn radius(&self) -> S {
        self.width() * S::half()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Membership with an absolute slack.
    pub fn contains(&self, v: S, slack: S) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn scale(&self, c: S) -> Self {
        Self::new(self.lo * c, self.hi * c)
    }

    pub fn offset(&self, c: S) -> Self {
        Self { lo: self.lo + c, hi: self.hi + c }
    }

    /// Smallest magnitude over the interval; zero when it straddles the origin.
    pub fn mag_min(&self) -> S {
        if self.lo > S::zero() {
            self.lo
        } else if self.hi < S::zero() {
            -self.hi
        } else {
            S::zero()
        }
    }

    pub fn mag_max(&self) -> S {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn abs(&self) -> Self {
        Self { lo: self.mag_min(), hi: self.mag_max() }
    }

    pub fn square(&self) -> Self {
        let a = self.mag_min();
        let b = self.mag_max();
        Self { lo: a * a, hi: b * b }
    }

    /// Square root of the non-negative part.
    pub fn sqrt(&self) -> Self {
        Self {
            lo: self.lo.max(S::zero()).sqrt(),
            hi: self.hi.max(S::zero()).sqrt(),
        }
    }

    pub fn exp(&self) -> Self {
        Self { lo: self.lo.exp(), hi: self.hi.exp() }
    }

    /// `1/x` for a strictly positive or strictly negative interval.
    pub fn recip(&self) -> Option<Self> {
        if self.lo > S::zero() || self.hi < S::zero() {
            Some(Self::new(S::one() / self.hi, S::one() / self.lo))
        } else {
            None
        }
    }

    pub fn clamp(&self, lo: S, hi: S) -> Self {
        Self::new(self.lo.max(lo).min(hi), self.hi.max(lo).min(hi))
    }
}

impl<S: Scalar> Add for Interval<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl<S: Scalar> Sub for Interval<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl<S: Scalar> Neg for Interval<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl<S: Scalar> Mul for Interval<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(S::infinity(), S::min);
        let hi = p.iter().copied().fold(S::neg_infinity(), S::max);
        Self { lo, hi }
    }
}

/// `true` if `offset + 2πk` lies in `[lo, hi]` for some integer `k`.
fn hits_phase<S: Scalar>(lo: S, hi: S, offset: S) -> bool {
    let tau = S::TAU();
    ((lo - offset) / tau).ceil() <= ((hi - offset) / tau).floor()
}

/// Exact range of `sin` over an interval.
pub fn sin_range<S: Scalar>(iv: Interval<S>) -> Interval<S> {
    if iv.width() >= S::TAU() {
        return Interval { lo: -S::one(), hi: S::one() };
    }
    let (a, b) = (iv.lo.sin(), iv.hi.sin());
    let hi = if hits_phase(iv.lo, iv.hi, S::FRAC_PI_2()) { S::one() } else { a.max(b) };
    let lo = if hits_phase(iv.lo, iv.hi, -S::FRAC_PI_2()) { -S::one() } else { a.min(b) };
    Interval { lo, hi }
}

/// Exact range of `cos` over an interval.
pub fn cos_range<S: Scalar>(iv: Interval<S>) -> Interval<S> {
    if iv.width() >= S::TAU() {
        return Interval { lo: -S::one(), hi: S::one() };
    }
    let (a, b) = (iv.lo.cos(), iv.hi.cos());
    let hi = if hits_phase(iv.lo, iv.hi, S::zero()) { S::one() } else { a.max(b) };
    let lo = if hits_phase(iv.lo, iv.hi, S::PI()) { -S::one() } else { a.min(b) };
    Interval { lo, hi }
}
