use std::collections::HashMap;

use super::{Camera, Scene};
use crate::error::{Error, Result};
use crate::relax::{BoxVar, PerturbBox};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SceneAttribute {
    Color(usize),
    Mean(usize),
    Opacity,
}

impl SceneAttribute {
    fn label(&self) -> String {
        match self {
            Self::Color(c) => format!("color.{}", ["r", "g", "b"].get(*c).unwrap_or(&"?")),
            Self::Mean(a) => format!("mean.{}", AXES.get(*a).unwrap_or(&"?")),
            Self::Opacity => "opacity".into(),
        }
    }

    fn target(&self, gaussian: usize) -> Target {
        match *self {
            Self::Color(channel) => Target::Color { gaussian, channel },
            Self::Mean(axis) => Target::Mean { gaussian, axis },
            Self::Opacity => Target::Opacity { gaussian },
        }
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

/// An additive offset in `[lo, hi]` applied to one attribute of a group of Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePerturb<S> {
    pub gaussians: Vec<usize>,
    pub attribute: SceneAttribute,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> ScenePerturb<S> {
    pub fn range(gaussians: Vec<usize>, attribute: SceneAttribute, lo: S, hi: S) -> Self {
        Self { gaussians, attribute, lo, hi }
    }

    pub fn half_width(gaussians: Vec<usize>, attribute: SceneAttribute, h: S) -> Self {
        Self { gaussians, attribute, lo: -h, hi: h }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSpec<S> {
    pub eps_t: [S; 3],
    pub eps_r: [S; 3],
    pub scene: Vec<ScenePerturb<S>>,
    pub parts: usize,
    /// One variable per listed Gaussian instead of one per group.
    pub independent: bool,
}

impl<S: Scalar> Default for PerturbSpec<S> {
    fn default() -> Self {
        Self { eps_t: [S::zero(); 3], eps_r: [S::zero(); 3], scene: Vec::new(), parts: 1, independent: false }
    }
}

impl<S: Scalar> PerturbSpec<S> {
    pub fn camera(eps_t: [S; 3], eps_r: [S; 3]) -> Self {
        Self { eps_t, eps_r, ..Self::default() }
    }

    pub fn with_scene(mut self, p: ScenePerturb<S>) -> Self {
        self.scene.push(p);
        self
    }

    pub fn with_parts(mut self, parts: usize) -> Self {
        self.parts = parts;
        self
    }
}

/// A parameter that a box variable offsets additively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Translation(usize),
    Euler(usize),
    Mean { gaussian: usize, axis: usize },
    Color { gaussian: usize, channel: usize },
    Opacity { gaussian: usize },
}

/// For each box variable, the parameters it offsets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    targets: Vec<Vec<Target>>,
}

impl Bindings {
    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self, var: usize) -> &[Target] {
        &self.targets[var]
    }

    pub fn vars_for(&self, target: Target) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .enumerate()
            .filter(move |(_, ts)| ts.contains(&target))
            .map(|(v, _)| v)
    }

    fn any(&self, pred: impl Fn(&Target) -> bool) -> bool {
        self.targets.iter().flatten().any(pred)
    }

    pub fn moves_rotation(&self) -> bool {
        self.any(|t| matches!(t, Target::Euler(_)))
    }

    pub fn moves_translation(&self) -> bool {
        self.any(|t| matches!(t, Target::Translation(_)))
    }

    pub fn moves_gaussian(&self, gaussian: usize) -> bool {
        self.any(|t| match *t {
            Target::Mean { gaussian: g, .. }
            | Target::Color { gaussian: g, .. }
            | Target::Opacity { gaussian: g } => g == gaussian,
            _ => false,
        })
    }

    /// The concrete camera and scene at box point `x`.
    pub fn apply<S: Scalar>(&self, x: &[S], camera: &Camera<S>, scene: &Scene<S>) -> (Camera<S>, Scene<S>) {
        assert_eq!(x.len(), self.dim(), "point dimension does not match bindings");
        let mut euler = camera.euler;
        let mut t = camera.t;
        let mut gaussians = scene.gaussians.clone();
        for (&xv, targets) in x.iter().zip(&self.targets) {
            for target in targets {
                match *target {
                    Target::Translation(a) => t[a] = t[a] + xv,
                    Target::Euler(a) => euler[a] = euler[a] + xv,
                    Target::Mean { gaussian, axis } => {
                        let m = &mut gaussians[gaussian].mean[axis];
                        *m = *m + xv;
                    }
                    Target::Color { gaussian, channel } => {
                        let c = &mut gaussians[gaussian].color[channel];
                        *c = *c + xv;
                    }
                    Target::Opacity { gaussian } => {
                        let o = &mut gaussians[gaussian].opacity;
                        *o = *o + xv;
                    }
                }
            }
        }
        (camera.with_pose(euler, t), Scene { gaussians })
    }
}

/// Builds the input box for `spec`. Variable order: translation axes, Euler
/// axes, then scene perturbations in listing order.
pub fn make_box<S: Scalar>(
    spec: &PerturbSpec<S>,
    _nominal: &Camera<S>,
    scene: &Scene<S>,
) -> Result<(PerturbBox<S>, Bindings)> {
    let bad = |m: String| Err(Error::InvalidPerturbation(m));
    if spec.parts == 0 {
        return bad("parts must be at least 1".into());
    }
    let mut vars = Vec::new();
    let mut targets = Vec::new();
    for (prefix, eps, mk) in [
        ("t", &spec.eps_t, Target::Translation as fn(usize) -> Target),
        ("euler", &spec.eps_r, Target::Euler as fn(usize) -> Target),
    ] {
        for (a, &e) in eps.iter().enumerate() {
            if !(e >= S::zero() && e.is_finite()) {
                return bad(format!("{prefix}.{}: half-width must be finite and non-negative", AXES[a]));
            }
            if e > S::zero() {
                vars.push(BoxVar::new(format!("{prefix}.{}", AXES[a]), -e, e));
                targets.push(vec![mk(a)]);
            }
        }
    }

    let mut totals: HashMap<Target, (S, S)> = HashMap::new();
    for (k, p) in spec.scene.iter().enumerate() {
        if !(p.lo <= p.hi && p.lo.is_finite() && p.hi.is_finite()) {
            return bad(format!("scene perturbation {k}: invalid range"));
        }
        match p.attribute {
            SceneAttribute::Color(c) | SceneAttribute::Mean(c) if c >= 3 => {
                return bad(format!("scene perturbation {k}: component {c} out of range"))
            }
            _ => {}
        }
        if p.gaussians.is_empty() {
            return bad(format!("scene perturbation {k}: empty gaussian set"));
        }
        if let Some(&g) = p.gaussians.iter().find(|&&g| g >= scene.len()) {
            return bad(format!("scene perturbation {k}: gaussian {g} out of range"));
        }
        let mut seen = p.gaussians.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != p.gaussians.len() {
            return bad(format!("scene perturbation {k}: repeated gaussian index"));
        }
        for &g in &p.gaussians {
            let e = totals.entry(p.attribute.target(g)).or_insert((S::zero(), S::zero()));
            e.0 = e.0 + p.lo;
            e.1 = e.1 + p.hi;
        }
        if p.lo == S::zero() && p.hi == S::zero() {
            continue;
        }
        let label = p.attribute.label();
        if spec.independent {
            for &g in &p.gaussians {
                vars.push(BoxVar::new(format!("scene{k}.g{g}.{label}"), p.lo, p.hi));
                targets.push(vec![p.attribute.target(g)]);
            }
        } else {
            vars.push(BoxVar::new(format!("scene{k}.{label}"), p.lo, p.hi));
            targets.push(p.gaussians.iter().map(|&g| p.attribute.target(g)).collect());
        }
    }

    for (target, (lo, hi)) in &totals {
        let (base, what, g) = match *target {
            Target::Color { gaussian, channel } => (scene.gaussians[gaussian].color[channel], "color", gaussian),
            Target::Opacity { gaussian } => (scene.gaussians[gaussian].opacity, "opacity", gaussian),
            _ => continue,
        };
        if base + *lo < S::zero() || base + *hi > S::one() {
            return bad(format!("gaussian {g}: {what} offset can leave [0, 1]"));
        }
    }

    Ok((PerturbBox::new(vars)?, Bindings { targets }))
}
