//! Relaxation rules: each op maps affine forms to a sound affine form of the result.
//!
//! Unary rules build one lower and one upper line over the argument's concretized
//! range and substitute the argument's lower or upper side depending on the sign
//! of the slope.

use std::sync::Arc;

use super::domain::PerturbBox;
use super::form::{AffineForm, LinearBound};
use super::interval::{cos_range, sin_range, Interval};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn constant<S: Scalar>(v: S, domain: &Arc<PerturbBox<S>>) -> AffineForm<S> {
    let n = domain.dim();
    AffineForm::from_bounds(domain.clone(), LinearBound::constant(n, v), LinearBound::constant(n, v))
}

pub fn constant_vector<S: Scalar>(v: &[S], domain: &Arc<PerturbBox<S>>) -> Vec<AffineForm<S>> {
    v.iter().map(|&x| constant(x, domain)).collect()
}

/// Zero-slope form whose sides are the interval ends.
pub fn constant_interval<S: Scalar>(iv: Interval<S>, domain: &Arc<PerturbBox<S>>) -> AffineForm<S> {
    let n = domain.dim();
    AffineForm::from_bounds(domain.clone(), LinearBound::constant(n, iv.lo), LinearBound::constant(n, iv.hi))
}

/// The `i`-th box coordinate as an exact identity form.
pub fn input_var<S: Scalar>(i: usize, domain: &Arc<PerturbBox<S>>) -> Result<AffineForm<S>> {
    let n = domain.dim();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, dim: n });
    }
    let mut side = LinearBound::constant(n, S::zero());
    side.coeffs[i] = S::one();
    Ok(AffineForm::from_bounds(domain.clone(), side.clone(), side))
}

pub fn concretize<S: Scalar>(f: &AffineForm<S>) -> Interval<S> {
    f.range()
}

pub fn concretize_all<S: Scalar>(fs: &[AffineForm<S>]) -> Vec<Interval<S>> {
    fs.iter().map(concretize).collect()
}

/// `bias + Σ coeffs[i] * fs[i]` with sign-aware side selection.
pub fn affine_compose<S: Scalar>(coeffs: &[S], bias: S, fs: &[&AffineForm<S>]) -> Result<AffineForm<S>> {
    if coeffs.len() != fs.len() {
        return Err(Error::ShapeMismatch(format!("{} coefficients for {} forms", coeffs.len(), fs.len())));
    }
    let first = fs
        .first()
        .ok_or_else(|| Error::ShapeMismatch("affine_compose needs at least one form".into()))?;
    let n = first.dim();
    let mut lower = LinearBound::constant(n, bias);
    let mut upper = LinearBound::constant(n, bias);
    let mut hint = Interval::point(bias);
    for (&c, f) in coeffs.iter().zip(fs) {
        first.check_domain(f)?;
        if c >= S::zero() {
            lower.add_scaled(f.lower(), c);
            upper.add_scaled(f.upper(), c);
        } else {
            lower.add_scaled(f.upper(), c);
            upper.add_scaled(f.lower(), c);
        }
        hint = hint + f.range().scale(c);
    }
    Ok(AffineForm::from_bounds(first.domain().clone(), lower, upper).with_range_hint(hint))
}

pub fn scale<S: Scalar>(f: &AffineForm<S>, c: S) -> AffineForm<S> {
    let (lo, hi) = if c >= S::zero() {
        (f.lower().scaled(c), f.upper().scaled(c))
    } else {
        (f.upper().scaled(c), f.lower().scaled(c))
    };
    AffineForm::from_bounds(f.domain().clone(), lo, hi).with_range_hint(f.range().scale(c))
}

pub fn offset<S: Scalar>(f: &AffineForm<S>, c: S) -> AffineForm<S> {
    let mut lo = f.lower().clone();
    let mut hi = f.upper().clone();
    lo.bias = lo.bias + c;
    hi.bias = hi.bias + c;
    AffineForm::from_bounds(f.domain().clone(), lo, hi).with_range_hint(f.range().offset(c))
}

pub fn add<S: Scalar>(f: &AffineForm<S>, g: &AffineForm<S>) -> Result<AffineForm<S>> {
    affine_compose(&[S::one(), S::one()], S::zero(), &[f, g])
}

pub fn sub<S: Scalar>(f: &AffineForm<S>, g: &AffineForm<S>) -> Result<AffineForm<S>> {
    affine_compose(&[S::one(), -S::one()], S::zero(), &[f, g])
}

/// Sum in ascending index order; `constant 0` for an empty list.
pub fn sum<S: Scalar>(fs: &[AffineForm<S>], domain: &Arc<PerturbBox<S>>) -> Result<AffineForm<S>> {
    if fs.is_empty() {
        return Ok(constant(S::zero(), domain));
    }
    let refs: Vec<&AffineForm<S>> = fs.iter().collect();
    affine_compose(&vec![S::one(); fs.len()], S::zero(), &refs)
}

#[derive(Debug, Clone, Copy)]
struct Line<S> {
    slope: S,
    intercept: S,
}

impl<S: Scalar> Line<S> {
    fn at(&self, y: S) -> S {
        self.slope * y + self.intercept
    }

    fn flat(v: S) -> Self {
        Self { slope: S::zero(), intercept: v }
    }

    fn through(slope: S, y: S, v: S) -> Self {
        Self { slope, intercept: v - slope * y }
    }
}

fn compose_unary<S: Scalar>(f: &AffineForm<S>, lo: Line<S>, hi: Line<S>, hint: Interval<S>) -> AffineForm<S> {
    let side = |line: Line<S>, for_lower: bool| {
        let src = if (line.slope >= S::zero()) == for_lower { f.lower() } else { f.upper() };
        let mut b = src.scaled(line.slope);
        b.bias = b.bias + line.intercept;
        b
    };
    AffineForm::from_bounds(f.domain().clone(), side(lo, true), side(hi, false)).with_range_hint(hint)
}

fn side_for<S: Scalar>(h: &AffineForm<S>, c: S, lower: bool) -> &LinearBound<S> {
    if (c >= S::zero()) == lower {
        h.lower()
    } else {
        h.upper()
    }
}

/// `alpha * f + beta * g + gamma` bounded from below (`lower = true`) or above.
fn compose_plane<S: Scalar>(
    f: &AffineForm<S>,
    g: &AffineForm<S>,
    alpha: S,
    beta: S,
    gamma: S,
    lower: bool,
) -> LinearBound<S> {
    let mut out = LinearBound::constant(f.dim(), gamma);
    out.add_scaled(side_for(f, alpha, lower), alpha);
    out.add_scaled(side_for(g, beta, lower), beta);
    out
}

/// Bilinear product by McCormick planes. Of the two planes per side, the one
/// with the smaller gap integrated over the box is kept; for affine sides that
/// is the one with the better value at the box center.
pub fn relax_mul<S: Scalar>(f: &AffineForm<S>, g: &AffineForm<S>) -> Result<AffineForm<S>> {
    f.check_domain(g)?;
    if let Some(c) = f.constant_value() {
        return Ok(scale(g, c));
    }
    if let Some(c) = g.constant_value() {
        return Ok(scale(f, c));
    }
    let (x, y) = (f.range(), g.range());
    let center = f.domain().center();

    let l1 = compose_plane(f, g, y.lo, x.lo, -(x.lo * y.lo), true);
    let l2 = compose_plane(f, g, y.hi, x.hi, -(x.hi * y.hi), true);

    let u1 = compose_plane(f, g, y.hi, x.lo, -(x.lo * y.hi), false);
    let u2 = compose_plane(f, g, y.lo, x.hi, -(x.hi * y.lo), false);

    // Range from both planes per side, so that a sub-box never reports a wider range.
    let dom = f.domain();
    let lo = min_of_max(&l1, &l2, dom);
    let hi = -min_of_max(&u1.scaled(-S::one()), &u2.scaled(-S::one()), dom);
    let lower = if l2.eval(center) > l1.eval(center) { l2 } else { l1 };
    let upper = if u2.eval(center) < u1.eval(center) { u2 } else { u1 };
    let planes = Interval::new(lo.min(hi), hi.max(lo));
    Ok(AffineForm::from_bounds(dom.clone(), lower, upper)
        .with_range_hint(x * y)
        .with_range_hint(planes))
}

/// `min_x max(p(x), q(x))` over the box, through the dual
/// `max_λ min_x (λ p + (1 − λ) q)`. Any `λ` gives a valid lower bound; the
/// optimum is at an end or where some coefficient changes sign.
fn min_of_max<S: Scalar>(p: &LinearBound<S>, q: &LinearBound<S>, domain: &PerturbBox<S>) -> S {
    let at = |lam: S| {
        let mut m = q.scaled(S::one() - lam);
        m.add_scaled(p, lam);
        m.min_over(domain)
    };
    let mut best = at(S::zero()).max(at(S::one()));
    for (&a, &b) in p.coeffs.iter().zip(&q.coeffs) {
        if (a > S::zero()) != (b > S::zero()) && a != b {
            let lam = b / (b - a);
            if lam > S::zero() && lam < S::one() {
                best = best.max(at(lam));
            }
        }
    }
    best
}

/// `f * f`: midpoint tangent below, chord above.
pub fn relax_square<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    let r = f.range();
    let m = r.mid();
    let lo = Line { slope: S::two() * m, intercept: -(m * m) };
    let hi = Line { slope: r.lo + r.hi, intercept: -(r.lo * r.hi) };
    compose_unary(f, lo, hi, r.square())
}

/// Tangent at the lower end of the range below, chord above.
pub fn relax_exp<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    let r = f.range();
    let (l, u) = (r.lo, r.hi);
    let el = l.exp();
    let tangent = Line { slope: el, intercept: el - el * l };
    let chord = if u > l {
        let w = u - l;
        let slope = if w > S::one() { (u.exp() - el) / w } else { el * w.exp_m1() / w };
        Line::through(slope, l, el)
    } else {
        tangent
    };
    compose_unary(f, tangent, chord, r.exp())
}

/// `1 / f` for a strictly positive range: tangent at the lower end below, chord above.
pub fn relax_div<S: Scalar>(f: &AffineForm<S>) -> Result<AffineForm<S>> {
    let r = f.range();
    let (l, u) = (r.lo, r.hi);
    if l <= S::zero() {
        return Err(Error::NonPositiveDivisorRange { lo: l.as_f64(), hi: u.as_f64() });
    }
    let tangent = Line { slope: -(S::one() / (l * l)), intercept: S::two() / l };
    let chord = Line { slope: -(S::one() / (l * u)), intercept: S::one() / l + S::one() / u };
    Ok(compose_unary(f, tangent, chord, Interval::new(S::one() / u, S::one() / l)))
}

/// Strict indicator `f > 0`.
pub fn relax_ind<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    let r = f.range();
    let domain = f.domain();
    if r.lo > S::zero() {
        constant(S::one(), domain)
    } else if r.hi <= S::zero() {
        constant(S::zero(), domain)
    } else {
        constant_interval(Interval::unit(), domain)
    }
}

#[derive(Clone, Copy)]
enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn value<S: Scalar>(self, y: S) -> S {
        match self {
            Trig::Sin => y.sin(),
            Trig::Cos => y.cos(),
        }
    }

    fn slope<S: Scalar>(self, y: S) -> S {
        match self {
            Trig::Sin => y.cos(),
            Trig::Cos => -y.sin(),
        }
    }

    fn range<S: Scalar>(self, iv: Interval<S>) -> Interval<S> {
        match self {
            Trig::Sin => sin_range(iv),
            Trig::Cos => cos_range(iv),
        }
    }

    /// Slope of the chord over `[m - r, m + r]`, written to avoid cancellation.
    fn chord_slope<S: Scalar>(self, m: S, r: S) -> S {
        if r == S::zero() {
            return self.slope(m);
        }
        let sinc = r.sin() / r;
        match self {
            Trig::Sin => m.cos() * sinc,
            Trig::Cos => -m.sin() * sinc,
        }
    }
}

/// Lines for sin/cos over an interval. On a piece of constant curvature sign
/// the chord and the midpoint tangent are used; constant range bounds cover
/// interior extrema; a Taylor-shifted tangent covers intervals spanning an
/// inflection. Of the sound candidates per side, the one closest to the
/// function at the midpoint wins.
fn trig_lines<S: Scalar>(kind: Trig, r: Interval<S>) -> (Line<S>, Line<S>, Interval<S>) {
    let range = kind.range(r);
    if r.width() >= S::TAU() {
        return (Line::flat(range.lo), Line::flat(range.hi), range);
    }
    let m = r.mid();
    let half = r.radius();
    let vm = kind.value(m);
    let tangent = Line::through(kind.slope(m), m, vm);
    // |g''| = |g| for sin and cos
    let curv = range.mag_max();
    let shift = curv * half * half * S::half();
    let taylor_lo = Line { slope: tangent.slope, intercept: tangent.intercept - shift };
    let taylor_hi = Line { slope: tangent.slope, intercept: tangent.intercept + shift };
    let chord = Line::through(kind.chord_slope(m, half), r.lo, kind.value(r.lo));

    let mut lo_cands = vec![Line::flat(range.lo), taylor_lo];
    let mut hi_cands = vec![Line::flat(range.hi), taylor_hi];
    if range.lo >= S::zero() {
        // concave
        lo_cands.insert(0, chord);
        hi_cands.insert(0, tangent);
    } else if range.hi <= S::zero() {
        // convex
        lo_cands.insert(0, tangent);
        hi_cands.insert(0, chord);
    }
    let best = |cands: &[Line<S>], better: fn(S, S) -> bool| {
        cands
            .iter()
            .copied()
            .reduce(|a, b| if better(b.at(m), a.at(m)) { b } else { a })
            .unwrap()
    };
    let lo = best(&lo_cands, |b, a| b > a);
    let hi = best(&hi_cands, |b, a| b < a);
    (lo, hi, range)
}

pub fn relax_sin<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    let (lo, hi, range) = trig_lines(Trig::Sin, f.range());
    compose_unary(f, lo, hi, range)
}

pub fn relax_cos<S: Scalar>(f: &AffineForm<S>) -> AffineForm<S> {
    let (lo, hi, range) = trig_lines(Trig::Cos, f.range());
    compose_unary(f, lo, hi, range)
}

/// Left fold of [`relax_mul`] in ascending index order; `constant 1` when empty.
pub fn relax_prod<S: Scalar>(fs: &[AffineForm<S>], domain: &Arc<PerturbBox<S>>) -> Result<AffineForm<S>> {
    let Some((first, rest)) = fs.split_first() else {
        return Ok(constant(S::one(), domain));
    };
    rest.iter().try_fold(first.clone(), |acc, f| relax_mul(&acc, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(lo: f64, hi: f64) -> Arc<PerturbBox<f64>> {
        Arc::new(PerturbBox::from_bounds(&[(lo, hi)]).unwrap())
    }

    #[test]
    fn constant_ignores_box() {
        let b = unit_box(-5.0, 5.0);
        let f = constant(std::f64::consts::PI, &b);
        assert_eq!(f.range().width(), 0.0);
        let v = constant_vector(&[1.0, 2.0], &b);
        assert_eq!(v[0].range(), Interval::point(1.0));
        assert_eq!(v[1].range(), Interval::point(2.0));
    }

    #[test]
    fn input_var_cases() {
        let b = unit_box(-1.0, 1.0);
        assert_eq!(input_var(0, &b).unwrap().range(), Interval::new(-1.0, 1.0));
        assert!(matches!(input_var(1, &b), Err(Error::IndexOutOfRange { index: 1, dim: 1 })));
        let p = unit_box(2.0, 2.0);
        assert_eq!(input_var(0, &p).unwrap().range(), Interval::point(2.0));
        let b2 = Arc::new(PerturbBox::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]).unwrap());
        let x1 = input_var(1, &b2).unwrap();
        assert_eq!(x1.lower().coeffs, vec![0.0, 1.0]);
    }

    #[test]
    fn concretize_hand_cases() {
        let b = unit_box(-1.0, 2.0);
        let x = input_var(0, &b).unwrap();
        assert_eq!(concretize(&x), Interval::new(-1.0, 2.0));
        assert_eq!(concretize(&scale(&x, -1.0)), Interval::new(-2.0, 1.0));
        // lower x + 1, upper 2x + 1 on [0, 1]
        let b = unit_box(0.0, 1.0);
        let f = AffineForm::from_bounds(
            b.clone(),
            LinearBound { coeffs: vec![1.0], bias: 1.0 },
            LinearBound { coeffs: vec![2.0], bias: 1.0 },
        );
        assert_eq!(concretize(&f), Interval::new(1.0, 3.0));
    }

    #[test]
    fn negation_swaps_sides() {
        let b = unit_box(0.0, 1.0);
        let f = AffineForm::from_bounds(
            b.clone(),
            LinearBound { coeffs: vec![1.0], bias: 0.0 },
            LinearBound { coeffs: vec![1.0], bias: 1.0 },
        );
        let g = affine_compose(&[-1.0], 0.0, &[&f]).unwrap();
        assert_eq!(g.lower(), &LinearBound { coeffs: vec![-1.0], bias: -1.0 });
        assert_eq!(g.upper(), &LinearBound { coeffs: vec![-1.0], bias: 0.0 });
    }

    #[test]
    fn compose_rejects_box_mismatch() {
        let a = input_var(0, &unit_box(0.0, 1.0)).unwrap();
        let b = input_var(0, &unit_box(0.0, 2.0)).unwrap();
        assert!(matches!(add(&a, &b), Err(Error::BoxMismatch)));
        assert!(matches!(relax_mul(&a, &b), Err(Error::BoxMismatch)));
    }

    #[test]
    fn mul_by_constant_is_exact() {
        let b = unit_box(0.0, 1.0);
        let x = input_var(0, &b).unwrap();
        let p = relax_mul(&constant(2.0, &b), &x).unwrap();
        assert_eq!(p.lower().coeffs, vec![2.0]);
        assert_eq!(p.upper().coeffs, vec![2.0]);
        assert_eq!(p.lower().bias, 0.0);
    }

    #[test]
    fn mccormick_lower_plane_touches_corners() {
        // x*x on [0,1]: the plane x + x - 1 is tight at both corners
        let b = unit_box(0.0, 1.0);
        let x = input_var(0, &b).unwrap();
        let p = relax_mul(&x, &x).unwrap();
        let lo = p.lower();
        for &c in &[0.0, 1.0] {
            let plane = lo.eval(&[c]);
            assert!(plane <= c * c + 1e-15);
        }
        // both candidate planes tie at the center; the first (y_lo x + x_lo y) wins
        assert_eq!(lo.eval(&[0.0]), 0.0);
        let alt = 2.0 * 1.0 - 1.0;
        assert!((lo.eval(&[1.0]) - 0.0).abs() < 1e-15 || (lo.eval(&[1.0]) - alt).abs() < 1e-15);
    }

    #[test]
    fn exp_table_formulas_on_unit_interval() {
        let b = unit_box(0.0, 1.0);
        let e = relax_exp(&input_var(0, &b).unwrap());
        let e1 = std::f64::consts::E;
        assert_eq!(e.lower(), &LinearBound { coeffs: vec![1.0], bias: 1.0 });
        assert!((e.upper().coeffs[0] - (e1 - 1.0)).abs() < 1e-15);
        assert!((e.upper().bias - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_degenerate_is_point() {
        let b = unit_box(0.7, 0.7);
        let e = relax_exp(&input_var(0, &b).unwrap());
        assert!((e.eval_lower(&[0.7]) - 0.7f64.exp()).abs() < 1e-15);
        assert!((e.eval_upper(&[0.7]) - 0.7f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn div_table_formulas_on_one_two() {
        let b = unit_box(1.0, 2.0);
        let d = relax_div(&input_var(0, &b).unwrap()).unwrap();
        // -(x-1)+1 and -(x-1)/2+1
        assert_eq!(d.lower(), &LinearBound { coeffs: vec![-1.0], bias: 2.0 });
        assert_eq!(d.upper(), &LinearBound { coeffs: vec![-0.5], bias: 1.5 });
        let c = relax_div(&input_var(0, &unit_box(4.0, 4.0)).unwrap()).unwrap();
        assert_eq!(c.range(), Interval::point(0.25));
    }

    #[test]
    fn div_rejects_non_positive() {
        let b = unit_box(0.0, 2.0);
        assert!(matches!(
            relax_div(&input_var(0, &b).unwrap()),
            Err(Error::NonPositiveDivisorRange { .. })
        ));
    }

    #[test]
    fn ind_three_positions() {
        let f = |lo, hi| relax_ind(&input_var(0, &unit_box(lo, hi)).unwrap()).range();
        assert_eq!(f(0.1, 5.0), Interval::point(1.0));
        assert_eq!(f(-3.0, 0.0), Interval::point(0.0));
        assert_eq!(f(-1.0, 1.0), Interval::new(0.0, 1.0));
    }

    #[test]
    fn cos_near_zero_has_flat_upper() {
        let c = relax_cos(&input_var(0, &unit_box(-0.1, 0.1)).unwrap());
        assert_eq!(c.upper(), &LinearBound { coeffs: vec![0.0], bias: 1.0 });
    }

    #[test]
    fn sin_point() {
        let s = relax_sin(&input_var(0, &unit_box(0.4, 0.4)).unwrap());
        assert!((s.eval_lower(&[0.4]) - 0.4f64.sin()).abs() < 1e-15);
        assert!((s.eval_upper(&[0.4]) - 0.4f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn prod_edge_cases() {
        let b = unit_box(0.0, 1.0);
        assert_eq!(relax_prod(&[], &b).unwrap().constant_value(), Some(1.0));
        let fs = constant_vector(&[2.0, 3.0, 4.0], &b);
        assert_eq!(relax_prod(&fs, &b).unwrap().constant_value(), Some(24.0));
    }
}
