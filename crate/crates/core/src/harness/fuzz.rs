use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::compute_metrics;
use crate::abstract_splat::{abstract_render_box, TileConfig};
use crate::error::Result;
use crate::render::{render_image, RenderOptions};
use crate::scene::{
    build_rotation, cholesky3, make_box, Camera, Gaussian3D, Mat3, PerturbSpec, Scene, SceneAttribute, ScenePerturb,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzKind {
    Translation,
    Rotation,
    Mixed,
    SceneColor,
    SceneMean,
    SceneOpacity,
    Zero,
}

impl FuzzKind {
    pub const PERTURBING: [FuzzKind; 6] = [
        Self::Translation,
        Self::Rotation,
        Self::Mixed,
        Self::SceneColor,
        Self::SceneMean,
        Self::SceneOpacity,
    ];
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub cases: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_gaussians: usize,
    pub width: usize,
    pub height: usize,
    pub kinds: Vec<FuzzKind>,
    pub tiles: TileConfig<f64>,
    /// Largest covariance condition number of generated Gaussians.
    pub max_condition: f64,
    pub tolerance: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            cases: 100,
            samples: 500,
            seed: 0,
            max_gaussians: 20,
            width: 16,
            height: 16,
            kinds: FuzzKind::PERTURBING.to_vec(),
            tiles: TileConfig::default(),
            max_condition: 100.0,
            tolerance: 1e-6,
        }
    }
}

impl FuzzConfig {
    /// Spiky Gaussians up to condition 1e6, to exercise contraction recovery.
    pub fn stress() -> Self {
        Self { max_condition: 1e6, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzCase {
    pub case: usize,
    pub kind: FuzzKind,
    pub gaussians: usize,
    pub box_dim: usize,
    pub max_violation: f64,
    pub mpg: f64,
    pub xpg: f64,
    /// Samples whose concrete render failed (e.g. a degenerate projection).
    pub skipped_samples: usize,
    pub contraction_splits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub cases: Vec<FuzzCase>,
    pub max_violation: f64,
    pub violations: usize,
    pub errors: usize,
    pub tolerance: f64,
    pub runtime_s: f64,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} cases, {} violations, {} errors, max violation {:.3e}, {:.1}s",
            self.cases.len(),
            self.violations,
            self.errors,
            self.max_violation,
            self.runtime_s
        )
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3<f64> {
    build_rotation([rng.random_range(-3.2..3.2), rng.random_range(-1.6..1.6), rng.random_range(-3.2..3.2)])
}

/// Random scene in front of `cam` with depths in `[3, 8]` and bounded covariance condition.
pub fn random_scene(rng: &mut ChaCha8Rng, n: usize, cam: &Camera<f64>, max_condition: f64) -> Scene<f64> {
    let ratio = max_condition.sqrt();
    let r = &cam.rotation;
    let gaussians = (0..n)
        .map(|_| {
            let d: f64 = rng.random_range(3.0..8.0);
            let uc = [rng.random_range(-0.5..0.5) * d, rng.random_range(-0.5..0.5) * d, d];
            let mean = std::array::from_fn(|i| cam.t[i] + (0..3).map(|k| r[k][i] * uc[k]).sum::<f64>());
            let smin: f64 = rng.random_range(0.08..0.3);
            let scales = [smin, smin * rng.random_range(1.0..ratio), smin * rng.random_range(1.0..ratio)];
            let rot = random_rotation(rng);
            let cov: Mat3<f64> = std::array::from_fn(|i| {
                std::array::from_fn(|j| (0..3).map(|k| rot[i][k] * scales[k] * scales[k] * rot[j][k]).sum())
            });
            Gaussian3D {
                mean,
                chol: cholesky3(&cov).expect("generated covariance is positive definite"),
                opacity: rng.random_range(0.2..0.9),
                color: std::array::from_fn(|_| rng.random_range(0.1..0.9)),
            }
        })
        .collect();
    Scene::new(gaussians).expect("generated scene is valid")
}

fn random_axes(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 3] {
    let mut e = [0.0; 3];
    let count = rng.random_range(1..=3);
    let mut axes = [0, 1, 2];
    axes.shuffle(rng);
    for &a in &axes[..count] {
        e[a] = rng.random_range(lo..hi);
    }
    e
}

fn scene_perturb(rng: &mut ChaCha8Rng, scene: &Scene<f64>, kind: FuzzKind) -> ScenePerturb<f64> {
    let n = scene.len();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let ids: Vec<usize> = ids[..rng.random_range(1..=n.min(4))].to_vec();
    match kind {
        FuzzKind::SceneColor => {
            let ch = rng.random_range(0..3);
            let room = ids.iter().map(|&g| scene.gaussians[g].color[ch].min(1.0 - scene.gaussians[g].color[ch])).fold(0.1, f64::min);
            let h = rng.random_range(0.2..1.0) * room;
            ScenePerturb::range(ids, SceneAttribute::Color(ch), -h, h)
        }
        FuzzKind::SceneOpacity => {
            let room = ids.iter().map(|&g| scene.gaussians[g].opacity.min(1.0 - scene.gaussians[g].opacity)).fold(0.1, f64::min);
            let h = rng.random_range(0.2..1.0) * room;
            ScenePerturb::range(ids, SceneAttribute::Opacity, -h, h)
        }
        _ => ScenePerturb::half_width(ids, SceneAttribute::Mean(rng.random_range(0..3)), rng.random_range(0.02..0.2)),
    }
}

fn random_spec(rng: &mut ChaCha8Rng, scene: &Scene<f64>, kind: FuzzKind) -> PerturbSpec<f64> {
    match kind {
        FuzzKind::Zero => PerturbSpec::default(),
        FuzzKind::Translation => PerturbSpec::camera(random_axes(rng, 0.01, 0.1), [0.0; 3]),
        FuzzKind::Rotation => PerturbSpec::camera([0.0; 3], random_axes(rng, 0.005, 0.04)),
        FuzzKind::Mixed => {
            let extra = *[FuzzKind::SceneColor, FuzzKind::SceneMean, FuzzKind::SceneOpacity].choose(rng).unwrap();
            PerturbSpec::camera(random_axes(rng, 0.005, 0.05), random_axes(rng, 0.002, 0.02))
                .with_scene(scene_perturb(rng, scene, extra))
        }
        k => PerturbSpec::default().with_scene(scene_perturb(rng, scene, k)),
    }
}

fn run_case(cfg: &FuzzConfig, case: usize) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(case as u64));
    let kind = cfg.kinds[case % cfg.kinds.len()];
    let euler = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
    let t = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
    let (w, h) = (cfg.width, cfg.height);
    let cam = Camera::new(euler, t, 16.0, 16.0, w as f64 / 2.0, h as f64 / 2.0, w, h).expect("valid camera");
    let n = rng.random_range(1..=cfg.max_gaussians);
    let scene = random_scene(&mut rng, n, &cam, cfg.max_condition);
    let spec = random_spec(&mut rng, &scene, kind);
    let sample_seed: u64 = rng.random();

    let mut out = FuzzCase {
        case,
        kind,
        gaussians: n,
        box_dim: 0,
        max_violation: 0.0,
        mpg: 0.0,
        xpg: 0.0,
        skipped_samples: 0,
        contraction_splits: 0,
        error: None,
    };
    let result = (|| -> Result<()> {
        let (domain, bindings) = make_box(&spec, &cam, &scene)?;
        out.box_dim = domain.dim();
        let (bounds, stats) = abstract_render_box(&scene, &cam, &bindings, &domain, spec.parts, &cfg.tiles)?;
        out.contraction_splits = stats.contraction_splits;
        let m = compute_metrics(&bounds);
        (out.mpg, out.xpg) = (m.mpg, m.xpg);
        let mut srng = ChaCha8Rng::seed_from_u64(sample_seed);
        let opts = RenderOptions { d_min: cfg.tiles.d_min, ..RenderOptions::default() };
        for _ in 0..cfg.samples {
            let u: Vec<f64> = (0..domain.dim()).map(|_| srng.random::<f64>()).collect();
            let (c, s) = bindings.apply(&domain.lerp(&u), &cam, &scene);
            match render_image(&s, &c, &opts) {
                Ok(img) => out.max_violation = out.max_violation.max(bounds.max_violation(&img)),
                Err(_) => out.skipped_samples += 1,
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    out
}

/// Random scenes, cameras, and perturbations; every sampled render must lie
/// inside the abstract bounds. Never fails; findings go in the report.
pub fn fuzz_soundness(cfg: &FuzzConfig) -> FuzzReport {
    let start = Instant::now();
    let cases: Vec<FuzzCase> = (0..cfg.cases).into_par_iter().map(|i| run_case(cfg, i)).collect();
    let max_violation = cases.iter().map(|c| c.max_violation).fold(0.0, f64::max);
    let violations = cases.iter().filter(|c| c.max_violation > cfg.tolerance).count();
    let errors = cases.iter().filter(|c| c.error.is_some()).count();
    FuzzReport { cases, max_violation, violations, errors, tolerance: cfg.tolerance, runtime_s: start.elapsed().as_secs_f64() }
}
