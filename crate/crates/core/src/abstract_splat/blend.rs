use std::sync::Arc;

use crate::error::Result;
use crate::relax::{affine_compose, constant, relax_ind, relax_mul, relax_prod, sub, sum, AffineForm, PerturbBox};
use crate::scalar::Scalar;

/// Pairwise strict indicators `[d_i > d_j]`; the diagonal is the constant 0.
pub(crate) fn indicator_matrix<S: Scalar>(
    d: &[AffineForm<S>],
    domain: &Arc<PerturbBox<S>>,
) -> Result<Vec<Vec<AffineForm<S>>>> {
    let zero = constant(S::zero(), domain);
    let mut out = Vec::with_capacity(d.len());
    for (i, di) in d.iter().enumerate() {
        let mut row = Vec::with_capacity(d.len());
        for (j, dj) in d.iter().enumerate() {
            row.push(if i == j { zero.clone() } else { relax_ind(&sub(di, dj)?) });
        }
        out.push(row);
    }
    Ok(out)
}

/// Index-free compositing over affine inputs, given the indicator matrix
/// restricted to the rows and columns in `sel`.
pub(crate) fn blend_with_indicators<S: Scalar>(
    a: &[AffineForm<S>],
    c: &[&[AffineForm<S>; 3]],
    ind: &[Vec<AffineForm<S>>],
    sel: &[usize],
    domain: &Arc<PerturbBox<S>>,
) -> Result<[AffineForm<S>; 3]> {
    let n = a.len();
    let mut terms: [Vec<AffineForm<S>>; 3] = Default::default();
    for i in 0..n {
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let ij = &ind[sel[i]][sel[j]];
            match ij.constant_value() {
                Some(z) if z == S::zero() => continue,
                Some(o) if o == S::one() => v.push(affine_compose(&[-S::one()], S::one(), &[&a[j]])?),
                _ => v.push(affine_compose(&[-S::one()], S::one(), &[&relax_mul(&a[j], ij)?])?),
            }
        }
        let t = relax_prod(&v, domain)?;
        let ta = relax_mul(&t, &a[i])?;
        for (ch, acc) in terms.iter_mut().enumerate() {
            acc.push(relax_mul(&ta, &c[i][ch])?);
        }
    }
    let [r, g, b] = terms;
    Ok([sum(&r, domain)?, sum(&g, domain)?, sum(&b, domain)?])
}

/// Lifted index-free blending: `T_i = Π_j (1 − a_j · Ind(d_i − d_j))`, `pc = Σ T_i a_i c_i`.
pub fn abstract_blend_ind<S: Scalar>(
    a: &[AffineForm<S>],
    c: &[[AffineForm<S>; 3]],
    d: &[AffineForm<S>],
    domain: &Arc<PerturbBox<S>>,
) -> Result<[AffineForm<S>; 3]> {
    assert!(a.len() == c.len() && a.len() == d.len(), "blend inputs differ in length");
    let ind = indicator_matrix(d, domain)?;
    let sel: Vec<usize> = (0..a.len()).collect();
    let cref: Vec<&[AffineForm<S>; 3]> = c.iter().collect();
    blend_with_indicators(a, &cref, &ind, &sel, domain)
}
