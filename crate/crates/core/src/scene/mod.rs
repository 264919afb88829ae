//! Scenes of 3D Gaussians, pinhole cameras, and perturbation specifications.

mod io;
mod lint;
mod perturb;
mod ply;

pub use io::{load_scene, parse_scene, save_scene, scene_to_json};
pub use lint::{covariance_condition, lint_scene, DEFAULT_CONDITION_THRESHOLD};
pub use perturb::{make_box, Bindings, PerturbSpec, SceneAttribute, ScenePerturb, Target};
pub use ply::load_ply;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Vec3<S> = [S; 3];
pub type Mat3<S> = [[S; 3]; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian3D<S> {
    /// World-frame mean.
    pub mean: Vec3<S>,
    /// Lower-triangular Cholesky factor of the covariance.
    pub chol: Mat3<S>,
    pub opacity: S,
    pub color: Vec3<S>,
}

impl<S: Scalar> Gaussian3D<S> {
    pub fn covariance(&self) -> Mat3<S> {
        mat_mul_transpose(&self.chol, &self.chol)
    }

    pub fn isotropic(mean: Vec3<S>, sigma: S, opacity: S, color: Vec3<S>) -> Self {
        let z = S::zero();
        Self {
            mean,
            chol: [[sigma, z, z], [z, sigma, z], [z, z, sigma]],
            opacity,
            color,
        }
    }

    pub(crate) fn validate(&self, index: usize) -> Result<()> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !self.mean.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidScene(format!("gaussian {index}: non-finite mean")));
        }
        if !unit(self.opacity) {
            return Err(Error::InvalidScene(format!("gaussian {index}: opacity outside [0, 1]")));
        }
        if !self.color.iter().all(|&c| unit(c)) {
            return Err(Error::InvalidScene(format!("gaussian {index}: color outside [0, 1]")));
        }
        if !is_canonical_factor(&self.chol) {
            return Err(Error::InvalidScene(format!(
                "gaussian {index}: factor is not lower-triangular with positive diagonal"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene<S> {
    pub gaussians: Vec<Gaussian3D<S>>,
}

impl<S: Scalar> Scene<S> {
    pub fn new(gaussians: Vec<Gaussian3D<S>>) -> Result<Self> {
        if gaussians.is_empty() {
            return Err(Error::InvalidScene("scene has no gaussians".into()));
        }
        for (i, g) in gaussians.iter().enumerate() {
            g.validate(i)?;
        }
        Ok(Self { gaussians })
    }

    pub fn len(&self) -> usize {
        self.gaussians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaussians.is_empty()
    }
}

/// Pinhole camera. `rotation` maps world to camera axes: `uc = R (uw − t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera<S> {
    pub euler: Vec3<S>,
    pub rotation: Mat3<S>,
    pub t: Vec3<S>,
    pub fx: S,
    pub fy: S,
    pub cx: S,
    pub cy: S,
    pub width: usize,
    pub height: usize,
}

impl<S: Scalar> Camera<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(euler: Vec3<S>, t: Vec3<S>, fx: S, fy: S, cx: S, cy: S, width: usize, height: usize) -> Result<Self> {
        if !(fx > S::zero() && fy > S::zero()) {
            return Err(Error::InvalidCamera("focal lengths must be positive".into()));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("image size must be positive".into()));
        }
        if !euler.iter().chain(&t).chain([&cx, &cy]).all(|v| v.is_finite()) {
            return Err(Error::InvalidCamera("non-finite pose or principal point".into()));
        }
        Ok(Self { euler, rotation: build_rotation(euler), t, fx, fy, cx, cy, width, height })
    }

    /// Same intrinsics, new pose.
    pub fn with_pose(&self, euler: Vec3<S>, t: Vec3<S>) -> Self {
        Self { euler, rotation: build_rotation(euler), t, ..self.clone() }
    }
}

/// `R = Rz(γ) · Ry(β) · Rx(α)` for XYZ Euler angles `(α, β, γ)`.
pub fn build_rotation<S: Scalar>(euler: Vec3<S>) -> Mat3<S> {
    let (sa, ca) = euler[0].sin_cos();
    let (sb, cb) = euler[1].sin_cos();
    let (sg, cg) = euler[2].sin_cos();
    [
        [cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa],
        [sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa],
        [-sb, cb * sa, cb * ca],
    ]
}

pub(crate) fn mat_mul_transpose<S: Scalar>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = [[S::zero(); 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[r][k] * b[c][k]).sum();
        }
    }
    out
}

pub(crate) fn is_canonical_factor<S: Scalar>(m: &Mat3<S>) -> bool {
    m[0][1] == S::zero()
        && m[0][2] == S::zero()
        && m[1][2] == S::zero()
        && (0..3).all(|i| m[i][i] > S::zero())
        && m.iter().flatten().all(|v| v.is_finite())
}

/// Cholesky factor of a symmetric positive definite 3×3 matrix.
pub fn cholesky3<S: Scalar>(cov: &Mat3<S>) -> Option<Mat3<S>> {
    let mut l = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: S = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = cov[i][i] - s;
                if !(d > S::zero()) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (cov[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
