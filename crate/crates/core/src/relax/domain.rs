use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One abstract input coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxVar<S> {
    pub name: String,
    pub lo: S,
    pub hi: S,
}

impl<S> BoxVar<S> {
    pub fn new(name: impl Into<String>, lo: S, hi: S) -> Self {
        Self { name: name.into(), lo, hi }
    }
}

/// Axis-aligned box of named input variables. Every affine form is valid over one box.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbBox<S> {
    vars: Vec<BoxVar<S>>,
    center: Vec<S>,
}

impl<S: Scalar> PerturbBox<S> {
    pub fn new(vars: Vec<BoxVar<S>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &vars {
            if !(v.lo.is_finite() && v.hi.is_finite()) {
                return Err(Error::InvalidBox(format!("variable {} has a non-finite bound", v.name)));
            }
            if v.lo > v.hi {
                return Err(Error::InvalidBox(format!("variable {} has lo > hi", v.name)));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidBox(format!("duplicate variable name {}", v.name)));
            }
        }
        Ok(Self::with_vars(vars))
    }

    fn with_vars(vars: Vec<BoxVar<S>>) -> Self {
        let center = vars.iter().map(|v| v.lo + (v.hi - v.lo) * S::half()).collect();
        Self { vars, center }
    }

    /// Box with no variables: every form over it is a constant.
    pub fn empty() -> Self {
        Self { vars: Vec::new(), center: Vec::new() }
    }

    /// Convenience constructor with generated names `x0, x1, ...`.
    pub fn from_bounds(bounds: &[(S, S)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi))| BoxVar { name: format!("x{i}"), lo, hi })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[BoxVar<S>] {
        &self.vars
    }

    pub fn var(&self, i: usize) -> Interval<S> {
        Interval { lo: self.vars[i].lo, hi: self.vars[i].hi }
    }

    pub fn center(&self) -> &[S] {
        &self.center
    }

    pub fn is_degenerate(&self) -> bool {
        self.vars.iter().all(|v| v.lo == v.hi)
    }

    pub fn contains_point(&self, x: &[S]) -> bool {
        x.len() == self.dim() && self.vars.iter().zip(x).all(|(v, &xi)| xi >= v.lo && xi <= v.hi)
    }

    /// Axis with the largest width; ties go to the lowest index. `None` for a degenerate box.
    pub fn widest_axis(&self) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for (i, v) in self.vars.iter().enumerate() {
            let w = v.hi - v.lo;
            if w > S::zero() && best.is_none_or(|(_, bw)| w > bw) {
                best = Some((i, w));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Splits along `axis` at fraction `t` of its width.
    pub fn split(&self, axis: usize, t: S) -> (Self, Self) {
        let v = &self.vars[axis];
        let cut = v.lo + (v.hi - v.lo) * t;
        let mut left = self.vars.clone();
        let mut right = self.vars.clone();
        left[axis].hi = cut;
        right[axis].lo = cut;
        (Self::with_vars(left), Self::with_vars(right))
    }

    /// Maps `u ∈ [0,1]^n` to the box.
    pub fn lerp(&self, u: &[S]) -> Vec<S> {
        self.vars.iter().zip(u).map(|(v, &t)| v.lo + (v.hi - v.lo) * t).collect()
    }
}
