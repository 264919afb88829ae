//! Exact concrete renderer: the ground truth for every soundness check.

mod blend;

pub use blend::{blend_ind, blend_sort};

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scene::{Camera, Gaussian3D, Mat3, Scene, Vec3};

pub const DEFAULT_D_MIN: f64 = 0.01;
/// Projected covariances with a larger condition number are rejected.
pub const MAX_CONIC_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Blender {
    Sort,
    #[default]
    Ind,
}

impl FromStr for Blender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sort" => Ok(Self::Sort),
            "ind" => Ok(Self::Ind),
            other => Err(Error::InvalidScene(format!("unknown blender {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions<S> {
    pub blender: Blender,
    /// Gaussians at depth `d <= d_min` are dropped.
    pub d_min: S,
}

impl<S: Scalar> Default for RenderOptions<S> {
    fn default() -> Self {
        Self { blender: Blender::default(), d_min: S::lit(DEFAULT_D_MIN) }
    }
}

impl<S: Scalar> RenderOptions<S> {
    pub fn with_blender(blender: Blender) -> Self {
        Self { blender, ..Self::default() }
    }
}

/// Pixel-independent per-Gaussian quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected<S> {
    pub index: usize,
    pub uc: Vec3<S>,
    pub mc: Mat3<S>,
    pub j: [[S; 3]; 2],
    pub up: [S; 2],
    pub mp: [[S; 3]; 2],
    pub d: S,
    pub conic: [[S; 2]; 2],
}

/// Full per-pixel trace of one Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderIntermediates<S> {
    pub projected: Projected<S>,
    pub q: Vec3<S>,
    pub a: S,
}

pub(crate) fn mat_vec<S: Scalar>(m: &Mat3<S>, v: &Vec3<S>) -> Vec3<S> {
    std::array::from_fn(|r| (0..3).map(|k| m[r][k] * v[k]).sum())
}

fn mat_mul<S: Scalar, const R: usize>(a: &[[S; 3]; R], b: &Mat3<S>) -> [[S; 3]; R] {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..3).map(|k| a[r][k] * b[k][c]).sum()))
}

/// Condition number of a symmetric 2×2 matrix; infinite when not positive definite.
pub(crate) fn sym2_condition<S: Scalar>(m: &[[S; 2]; 2]) -> S {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = ((m[0][0] - m[1][1]) * (m[0][0] - m[1][1]) * S::lit(0.25) + m[0][1] * m[1][0]).max(S::zero()).sqrt();
    let hi = tr * S::half() + disc;
    let lo = det / hi;
    if lo > S::zero() {
        hi / lo
    } else {
        S::infinity()
    }
}

/// Projects one Gaussian; `Ok(None)` when it is depth-culled.
pub fn project_gaussian<S: Scalar>(
    index: usize,
    g: &Gaussian3D<S>,
    cam: &Camera<S>,
    d_min: S,
) -> Result<Option<Projected<S>>> {
    let rel = [g.mean[0] - cam.t[0], g.mean[1] - cam.t[1], g.mean[2] - cam.t[2]];
    let uc = mat_vec(&cam.rotation, &rel);
    let d = uc[2];
    if !(d > d_min) {
        return Ok(None);
    }
    let mc = mat_mul(&cam.rotation, &g.chol);
    let z = S::zero();
    let j = [[cam.fx * d, z, -(cam.fx * uc[0])], [z, cam.fy * d, -(cam.fy * uc[1])]];
    let up = [cam.fx * uc[0] + cam.cx * d, cam.fy * uc[1] + cam.cy * d];
    let mp = mat_mul(&j, &mc);
    let cov: [[S; 2]; 2] =
        std::array::from_fn(|r| std::array::from_fn(|c| (0..3).map(|k| mp[r][k] * mp[c][k]).sum()));
    let condition = sym2_condition(&cov);
    if !(condition <= S::lit(MAX_CONIC_CONDITION)) {
        return Err(Error::SingularConic { gaussian: index, condition: condition.as_f64() });
    }
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let conic = [[cov[1][1] / det, -cov[0][1] / det], [-cov[1][0] / det, cov[0][0] / det]];
    Ok(Some(Projected { index, uc, mc, j, up, mp, d, conic }))
}

/// `(q, a)` of a projected Gaussian at pixel position `u`.
pub fn gaussian_alpha<S: Scalar>(p: &Projected<S>, opacity: S, u: [S; 2]) -> (Vec3<S>, S) {
    let d2 = p.d * p.d;
    let w = [d2 * u[0] - p.d * p.up[0], d2 * u[1] - p.d * p.up[1]];
    let wc = [w[0] * p.conic[0][0] + w[1] * p.conic[1][0], w[0] * p.conic[0][1] + w[1] * p.conic[1][1]];
    let q: Vec3<S> = std::array::from_fn(|k| wc[0] * p.mp[0][k] + wc[1] * p.mp[1][k]);
    let qq: S = q.iter().map(|&v| v * v).sum();
    (q, opacity * (-(qq * S::half())).exp())
}

/// Projects every Gaussian, returning the survivors and the number culled.
pub fn project_scene<S: Scalar>(scene: &Scene<S>, cam: &Camera<S>, d_min: S) -> Result<(Vec<Projected<S>>, usize)> {
    let mut out = Vec::with_capacity(scene.len());
    for (i, g) in scene.gaussians.iter().enumerate() {
        if let Some(p) = project_gaussian(i, g, cam, d_min)? {
            out.push(p);
        }
    }
    let culled = scene.len() - out.len();
    Ok((out, culled))
}

/// Per-Gaussian trace at one pixel for the Gaussians that survive culling.
pub fn intermediates<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    u: [S; 2],
    d_min: S,
) -> Result<Vec<RenderIntermediates<S>>> {
    let (proj, _) = project_scene(scene, cam, d_min)?;
    Ok(proj
        .into_iter()
        .map(|p| {
            let (q, a) = gaussian_alpha(&p, scene.gaussians[p.index].opacity, u);
            RenderIntermediates { projected: p, q, a }
        })
        .collect())
}

fn shade<S: Scalar>(scene: &Scene<S>, proj: &[Projected<S>], u: [S; 2], blender: Blender) -> Vec3<S> {
    let mut a = Vec::with_capacity(proj.len());
    let mut c = Vec::with_capacity(proj.len());
    let mut d = Vec::with_capacity(proj.len());
    for p in proj {
        let g = &scene.gaussians[p.index];
        a.push(gaussian_alpha(p, g.opacity, u).1);
        c.push(g.color);
        d.push(p.d);
    }
    let pc = match blender {
        Blender::Sort => blend_sort(&a, &c, &d),
        Blender::Ind => blend_ind(&a, &c, &d),
    };
    pc.map(|v| v.max(S::zero()).min(S::one()))
}

pub fn splat_pixel<S: Scalar>(scene: &Scene<S>, cam: &Camera<S>, u: [S; 2], opts: &RenderOptions<S>) -> Result<Vec3<S>> {
    let (proj, _) = project_scene(scene, cam, opts.d_min)?;
    Ok(shade(scene, &proj, u, opts.blender))
}

/// Row-major RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<S> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<Vec3<S>>,
}

impl<S: Scalar> Image<S> {
    pub fn filled(width: usize, height: usize, v: Vec3<S>) -> Self {
        Self { width, height, data: vec![v; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> Vec3<S> {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: Vec3<S>) {
        self.data[y * self.width + x] = v;
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(S::zero(), S::max)
    }
}

/// Pixel center convention: pixel `(x, y)` is sampled at `(x + ½, y + ½)`.
pub fn pixel_center<S: Scalar>(x: usize, y: usize) -> [S; 2] {
    [S::lit(x as f64 + 0.5), S::lit(y as f64 + 0.5)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderStats {
    pub culled: usize,
}

pub fn render_image<S: Scalar>(scene: &Scene<S>, cam: &Camera<S>, opts: &RenderOptions<S>) -> Result<Image<S>> {
    render_image_with_stats(scene, cam, opts).map(|(img, _)| img)
}

pub fn render_image_with_stats<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    opts: &RenderOptions<S>,
) -> Result<(Image<S>, RenderStats)> {
    let (proj, culled) = project_scene(scene, cam, opts.d_min)?;
    let data = (0..cam.width * cam.height)
        .into_par_iter()
        .map(|i| shade(scene, &proj, pixel_center(i % cam.width, i / cam.width), opts.blender))
        .collect();
    Ok((Image { width: cam.width, height: cam.height, data }, RenderStats { culled }))
}
