//! Per-box lifting of the splatting pipeline.

use std::sync::Arc;

use super::blend::{blend_with_indicators, indicator_matrix};
use super::TileConfig;
use crate::error::{Error, Result};
use crate::matinv::matrix_inv_enclose_affine;
use crate::matrix::Matrix;
use crate::relax::{
    affine_compose, concretize, concretize_matrix, constant, input_var, relax_cos, relax_exp, relax_matmul, relax_mul,
    relax_sin, relax_square, scale, sum, AffineForm, FormMatrix, Interval, PerturbBox,
};
use crate::scalar::Scalar;
use crate::scene::{Bindings, Camera, Scene, Target};

type Form<S> = AffineForm<S>;

/// `base + Σ x_v` over the variables bound to `target`.
fn param_form<S: Scalar>(base: S, target: Target, bindings: &Bindings, domain: &Arc<PerturbBox<S>>) -> Result<Form<S>> {
    let vars: Vec<Form<S>> = bindings.vars_for(target).map(|v| input_var(v, domain)).collect::<Result<_>>()?;
    if vars.is_empty() {
        return Ok(constant(base, domain));
    }
    let refs: Vec<&Form<S>> = vars.iter().collect();
    affine_compose(&vec![S::one(); refs.len()], base, &refs)
}

fn form_matrix<S: Scalar>(rows: usize, cols: usize, v: Vec<Form<S>>) -> Result<FormMatrix<S>> {
    Matrix::from_vec(rows, cols, v)
}

fn rotation_forms<S: Scalar>(cam: &Camera<S>, bindings: &Bindings, domain: &Arc<PerturbBox<S>>) -> Result<FormMatrix<S>> {
    if !bindings.moves_rotation() {
        let flat = cam.rotation.iter().flatten().map(|&v| constant(v, domain)).collect();
        return form_matrix(3, 3, flat);
    }
    let mut sc = Vec::with_capacity(3);
    for a in 0..3 {
        let th = param_form(cam.euler[a], Target::Euler(a), bindings, domain)?;
        sc.push((relax_sin(&th), relax_cos(&th)));
    }
    let (o, z) = (constant(S::one(), domain), constant(S::zero(), domain));
    let neg = |f: &Form<S>| scale(f, -S::one());
    let (sa, ca) = sc[0].clone();
    let (sb, cb) = sc[1].clone();
    let (sg, cg) = sc[2].clone();
    let rx = form_matrix(3, 3, vec![o.clone(), z.clone(), z.clone(), z.clone(), ca.clone(), neg(&sa), z.clone(), sa, ca])?;
    let ry = form_matrix(3, 3, vec![cb.clone(), z.clone(), sb.clone(), z.clone(), o.clone(), z.clone(), neg(&sb), z.clone(), cb])?;
    let rz = form_matrix(3, 3, vec![cg.clone(), neg(&sg), z.clone(), sg, cg, z.clone(), z.clone(), z, o])?;
    relax_matmul(&relax_matmul(&rz, &ry)?, &rx)
}

/// Pixel-independent quantities of one Gaussian over one box.
#[derive(Debug, Clone)]
pub(crate) struct GaussianForms<S> {
    pub d: Form<S>,
    dd: Form<S>,
    dup: [Form<S>; 2],
    /// `Conic · Mp`.
    b: [[Form<S>; 3]; 2],
    opacity: Form<S>,
    pub color: [Form<S>; 3],
    /// Concretized pixel-space mean `up / d`.
    mean_px: [Interval<S>; 2],
    /// Lower bound on `s / |u − mean|²`.
    spread: S,
    opacity_hi: S,
}

impl<S: Scalar> GaussianForms<S> {
    /// Upper bound on the Gaussian's effective opacity anywhere in the pixel-center rectangle.
    pub fn alpha_bound(&self, x: Interval<S>, y: Interval<S>) -> S {
        let gap = |p: Interval<S>, m: Interval<S>| (m.lo - p.hi).max(p.lo - m.hi).max(S::zero());
        let gx = gap(x, self.mean_px[0]);
        let gy = gap(y, self.mean_px[1]);
        let s = self.spread * (gx * gx + gy * gy);
        self.opacity_hi * (-(s * S::half())).exp()
    }

    /// Effective opacity at pixel position `u`.
    pub fn alpha(&self, u: [S; 2]) -> Result<Form<S>> {
        let w0 = affine_compose(&[u[0], -S::one()], S::zero(), &[&self.dd, &self.dup[0]])?;
        let w1 = affine_compose(&[u[1], -S::one()], S::zero(), &[&self.dd, &self.dup[1]])?;
        let mut sq = Vec::with_capacity(3);
        for c in 0..3 {
            let q = sum(&[relax_mul(&w0, &self.b[0][c])?, relax_mul(&w1, &self.b[1][c])?], self.d.domain())?;
            sq.push(relax_square(&q));
        }
        let s = sum(&sq, self.d.domain())?;
        let e = relax_exp(&scale(&s, -S::half()));
        relax_mul(&self.opacity, &e)
    }
}

/// Everything the per-pixel stage needs for one box.
pub(crate) struct BoxForms<S> {
    pub domain: Arc<PerturbBox<S>>,
    pub gaussians: Vec<GaussianForms<S>>,
    pub ind: Vec<Vec<Form<S>>>,
    /// Added to every pixel's upper bound and removed from its lower bound.
    pub slack: S,
    pub straddling: usize,
    pub behind: usize,
}

pub(crate) fn lift_box<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    bindings: &Bindings,
    domain: &Arc<PerturbBox<S>>,
    cfg: &TileConfig<S>,
) -> Result<BoxForms<S>> {
    if domain.dim() != bindings.dim() {
        return Err(Error::ShapeMismatch(format!(
            "box has {} variables, bindings {}",
            domain.dim(),
            bindings.dim()
        )));
    }
    let t: Vec<Form<S>> =
        (0..3).map(|a| param_form(cam.t[a], Target::Translation(a), bindings, domain)).collect::<Result<_>>()?;
    let r = rotation_forms(cam, bindings, domain)?;

    let mut gaussians = Vec::with_capacity(scene.len());
    let (mut slack, mut straddling, mut behind) = (S::zero(), 0, 0);
    for (i, g) in scene.gaussians.iter().enumerate() {
        let mut rel = Vec::with_capacity(3);
        for a in 0..3 {
            let uw = param_form(g.mean[a], Target::Mean { gaussian: i, axis: a }, bindings, domain)?;
            rel.push(affine_compose(&[S::one(), -S::one()], S::zero(), &[&uw, &t[a]])?);
        }
        let uc = relax_matmul(&r, &form_matrix(3, 1, rel)?)?;
        let d = uc[(2, 0)].clone();
        let dr = concretize(&d);
        let opacity = param_form(g.opacity, Target::Opacity { gaussian: i }, bindings, domain)?;
        if dr.hi <= cfg.d_min {
            behind += 1;
            continue;
        }
        if dr.lo <= cfg.d_min {
            log::warn!("gaussian {i} crosses the near plane inside the box; bounded by its opacity");
            straddling += 1;
            slack = slack + concretize(&opacity).hi;
            continue;
        }
        match lift_gaussian(i, g, cam, &r, &uc, opacity, bindings, domain, cfg) {
            Ok(gf) => gaussians.push(gf),
            Err(Error::SingularReference) => {
                return Err(Error::GaussianContraction { gaussian: i, norm: f64::INFINITY, axis: None })
            }
            Err(e) => return Err(e),
        }
    }
    let d: Vec<Form<S>> = gaussians.iter().map(|g| g.d.clone()).collect();
    let ind = indicator_matrix(&d, domain)?;
    Ok(BoxForms { domain: domain.clone(), gaussians, ind, slack, straddling, behind })
}

#[allow(clippy::too_many_arguments)]
fn lift_gaussian<S: Scalar>(
    i: usize,
    g: &crate::scene::Gaussian3D<S>,
    cam: &Camera<S>,
    r: &FormMatrix<S>,
    uc: &FormMatrix<S>,
    opacity: Form<S>,
    bindings: &Bindings,
    domain: &Arc<PerturbBox<S>>,
    cfg: &TileConfig<S>,
) -> Result<GaussianForms<S>> {
    let d = uc[(2, 0)].clone();
    let mw = form_matrix(3, 3, g.chol.iter().flatten().map(|&v| constant(v, domain)).collect())?;
    let mc = relax_matmul(r, &mw)?;
    let z = constant(S::zero(), domain);
    let j = form_matrix(
        2,
        3,
        vec![
            scale(&d, cam.fx),
            z.clone(),
            scale(&uc[(0, 0)], -cam.fx),
            z,
            scale(&d, cam.fy),
            scale(&uc[(1, 0)], -cam.fy),
        ],
    )?;
    let up = [
        affine_compose(&[cam.fx, cam.cx], S::zero(), &[&uc[(0, 0)], &d])?,
        affine_compose(&[cam.fy, cam.cy], S::zero(), &[&uc[(1, 0)], &d])?,
    ];
    let mp = relax_matmul(&j, &mc)?;

    let mut diag = Vec::with_capacity(2);
    for row in 0..2 {
        diag.push(sum(&(0..3).map(|k| relax_square(&mp[(row, k)])).collect::<Vec<_>>(), domain)?);
    }
    let off = sum(&(0..3).map(|k| relax_mul(&mp[(0, k)], &mp[(1, k)])).collect::<Result<Vec<_>>>()?, domain)?;
    // Normalize so the remainder tolerance is relative to the conic's scale.
    let norm = (concretize(&diag[0]).mid() + concretize(&diag[1]).mid()) * S::half();
    if !(norm > S::zero() && norm.is_finite()) {
        return Err(Error::SingularReference);
    }
    let inv_norm = S::one() / norm;
    let cov = form_matrix(
        2,
        2,
        vec![scale(&diag[0], inv_norm), scale(&off, inv_norm), scale(&off, inv_norm), scale(&diag[1], inv_norm)],
    )?;
    let conic = match matrix_inv_enclose_affine(&cov, &cfg.inv) {
        Ok(enc) => enc.union(),
        Err(Error::ContractionViolated { norm }) => {
            return Err(Error::GaussianContraction { gaussian: i, norm, axis: sensitive_axis(&cov, domain) })
        }
        Err(Error::SingularReference) => {
            return Err(Error::GaussianContraction { gaussian: i, norm: f64::INFINITY, axis: sensitive_axis(&cov, domain) })
        }
        Err(e) => return Err(e),
    };
    let conic = form_matrix(2, 2, conic.iter().map(|f| scale(f, inv_norm)).collect())?;
    let bm = relax_matmul(&conic, &mp)?;

    let mp_iv = concretize_matrix(&mp);
    let fro_hi: S = mp_iv.iter().map(|v| v.mag_max() * v.mag_max()).sum();
    let dr = concretize(&d);
    let d4 = dr.lo * dr.lo * dr.lo * dr.lo;
    let spread = if fro_hi > S::zero() { d4 / fro_hi } else { S::zero() };
    let inv_d = dr.recip().expect("depth range is positive");
    let mean_px = [concretize(&up[0]) * inv_d, concretize(&up[1]) * inv_d];

    let color = [0, 1, 2].map(|c| param_form(g.color[c], Target::Color { gaussian: i, channel: c }, bindings, domain));
    let [c0, c1, c2] = color;
    let color = [c0?, c1?, c2?];
    let dd = relax_square(&d);
    let dup = [relax_mul(&d, &up[0])?, relax_mul(&d, &up[1])?];
    let b = [
        [bm[(0, 0)].clone(), bm[(0, 1)].clone(), bm[(0, 2)].clone()],
        [bm[(1, 0)].clone(), bm[(1, 1)].clone(), bm[(1, 2)].clone()],
    ];
    let opacity_hi = concretize(&opacity).hi;
    Ok(GaussianForms { d, dd, dup, b, opacity, color, mean_px, spread, opacity_hi })
}

/// The variable contributing most width to the covariance entries.
fn sensitive_axis<S: Scalar>(cov: &FormMatrix<S>, domain: &PerturbBox<S>) -> Option<usize> {
    let score = |v: usize| {
        let w = domain.var(v).width();
        cov.iter().map(|f| (f.lower().coeffs[v].abs() + f.upper().coeffs[v].abs()) * w).sum::<S>()
    };
    (0..domain.dim()).filter(|&v| domain.var(v).width() > S::zero()).max_by(|&a, &b| {
        score(a).partial_cmp(&score(b)).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a))
    })
}

/// Bounds of one pixel from the Gaussians listed in `cand` (indices into `forms.gaussians`).
pub(crate) fn shade_pixel<S: Scalar>(
    forms: &BoxForms<S>,
    cand: &[usize],
    u: [S; 2],
    extra_slack: S,
    cfg: &TileConfig<S>,
) -> Result<[Interval<S>; 3]> {
    let pt = (Interval::point(u[0]), Interval::point(u[1]));
    let mut slack = forms.slack + extra_slack;
    let mut sel = Vec::with_capacity(cand.len());
    for &k in cand {
        let bound = forms.gaussians[k].alpha_bound(pt.0, pt.1);
        if bound < cfg.cull_eps {
            slack = slack + bound;
        } else {
            sel.push(k);
        }
    }
    let mut a = Vec::with_capacity(sel.len());
    for batch in sel.chunks(cfg.batch.max(1)) {
        for &k in batch {
            a.push(forms.gaussians[k].alpha(u)?);
        }
    }
    let c: Vec<&[Form<S>; 3]> = sel.iter().map(|&k| &forms.gaussians[k].color).collect();
    let pc = blend_with_indicators(&a, &c, &forms.ind, &sel, &forms.domain)?;
    Ok(pc.map(|f| {
        let r = concretize(&f);
        Interval::new(r.lo - slack, r.hi + slack).clamp(S::zero(), S::one())
    }))
}
