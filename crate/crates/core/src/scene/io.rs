use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{cholesky3, is_canonical_factor, mat_mul_transpose, Gaussian3D, Mat3, Scene};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    gaussians: Vec<GaussianRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRecord {
    mean: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chol: Option<Mat3<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cov: Option<Mat3<f64>>,
    opacity: f64,
    color: [f64; 3],
}

pub fn load_scene<S: Scalar>(path: impl AsRef<Path>) -> Result<Scene<S>> {
    let text = std::fs::read_to_string(path)?;
    parse_scene(&text)
}

pub fn parse_scene<S: Scalar>(text: &str) -> Result<Scene<S>> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut gaussians = Vec::with_capacity(file.gaussians.len());
    for (i, rec) in file.gaussians.into_iter().enumerate() {
        let chol = canonical_factor(&rec, i)?;
        let conv = |v: [f64; 3]| v.map(S::lit);
        gaussians.push(Gaussian3D {
            mean: conv(rec.mean),
            chol: chol.map(conv),
            opacity: S::lit(rec.opacity),
            color: conv(rec.color),
        });
    }
    Scene::new(gaussians)
}

fn canonical_factor(rec: &GaussianRecord, index: usize) -> Result<Mat3<f64>> {
    let cov = match (&rec.chol, &rec.cov) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidScene(format!("gaussian {index}: both chol and cov given")))
        }
        (None, None) => {
            return Err(Error::InvalidScene(format!("gaussian {index}: missing chol or cov")))
        }
        (Some(m), None) if is_canonical_factor(m) => return Ok(*m),
        (Some(m), None) => mat_mul_transpose(m, m),
        (None, Some(c)) => {
            let asym = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .any(|(i, j)| (c[i][j] - c[j][i]).abs() > 1e-12 * (1.0 + c[i][j].abs()));
            if asym {
                return Err(Error::InvalidScene(format!("gaussian {index}: covariance not symmetric")));
            }
            *c
        }
    };
    cholesky3(&cov).ok_or(Error::NonPsdCovariance { index })
}

/// Serializes in canonical form: every Gaussian carries its Cholesky factor.
pub fn scene_to_json<S: Scalar>(scene: &Scene<S>) -> String {
    let to64 = |v: [S; 3]| v.map(|x| x.as_f64());
    let file = SceneFile {
        gaussians: scene
            .gaussians
            .iter()
            .map(|g| GaussianRecord {
                mean: to64(g.mean),
                chol: Some(g.chol.map(to64)),
                cov: None,
                opacity: g.opacity.as_f64(),
                color: to64(g.color),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("scene serialization is infallible");
    s.push('\n');
    s
}

pub fn save_scene<S: Scalar>(scene: &Scene<S>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scene_to_json(scene))?;
    Ok(())
}
