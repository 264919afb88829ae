//! Empirical oracles: metrics, sampled envelopes, the soundness fuzzer, and
//! the worked matrix-inverse example.

mod example1;
mod fuzz;

pub use example1::{example1, example1_bounds, Example1Report};
pub use fuzz::{fuzz_soundness, random_scene, FuzzCase, FuzzConfig, FuzzKind, FuzzReport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::abstract_splat::BoundImage;
use crate::error::Result;
use crate::render::{render_image, RenderOptions};
use crate::scalar::Scalar;
use crate::scene::{make_box, Camera, PerturbSpec, Scene};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub mpg: f64,
    pub xpg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
}

/// Per-pixel Euclidean RGB distance between the upper and lower image.
pub fn pixel_gaps<S: Scalar>(b: &BoundImage<S>) -> Vec<f64> {
    b.lower
        .data
        .iter()
        .zip(&b.upper.data)
        .map(|(lo, hi)| (0..3).map(|c| (hi[c] - lo[c]).as_f64().powi(2)).sum::<f64>().sqrt())
        .collect()
}

pub fn compute_metrics<S: Scalar>(b: &BoundImage<S>) -> Metrics {
    let gaps = pixel_gaps(b);
    let n = gaps.len().max(1) as f64;
    let mpg = gaps.iter().sum::<f64>() / n;
    let xpg = gaps.iter().copied().fold(0.0, f64::max);
    Metrics { mpg, xpg, gaps: None }
}

/// Uniform draws from the box of `spec`, in draw order.
pub fn sample_points<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    spec: &PerturbSpec<S>,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<S>>> {
    let (domain, _) = make_box(spec, cam, scene)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let u: Vec<S> = (0..domain.dim()).map(|_| S::lit(rng.random::<f64>())).collect();
            domain.lerp(&u)
        })
        .collect())
}

/// Pixelwise min/max over `n` concrete renders drawn uniformly from the box.
pub fn sample_envelope<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    spec: &PerturbSpec<S>,
    n: usize,
    seed: u64,
    opts: &RenderOptions<S>,
) -> Result<BoundImage<S>> {
    assert!(n >= 1, "need at least one sample");
    let (_, bindings) = make_box(spec, cam, scene)?;
    let points = sample_points(scene, cam, spec, n, seed)?;
    let images = points
        .par_iter()
        .map(|x| {
            let (c, s) = bindings.apply(x, cam, scene);
            render_image(&s, &c, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut env = BoundImage::from_image(&images[0]);
    for img in &images[1..] {
        env.include(img);
    }
    Ok(env)
}
