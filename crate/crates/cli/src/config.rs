//! Run configuration: one JSON file plus dotted-path `--set` overrides.

use std::path::{Path, PathBuf};

use absplat_core::abstract_splat::{SplitAxis, TileConfig};
use absplat_core::matinv::InvOptions;
use absplat_core::render::{Blender, RenderOptions};
use absplat_core::scene::{Camera, PerturbSpec, SceneAttribute, ScenePerturb};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub camera: CameraConfig,
    #[serde(default)]
    pub perturb: PerturbConfig,
    #[serde(default)]
    pub engine: EngineConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    #[serde(default)]
    pub euler: [f64; 3],
    #[serde(default)]
    pub t: [f64; 3],
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "H")]
    pub height: usize,
}

/// A scalar applies to all three axes.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    All(f64),
    Axes([f64; 3]),
}

impl Default for Radius {
    fn default() -> Self {
        Self::All(0.0)
    }
}

impl Radius {
    pub fn axes(self) -> [f64; 3] {
        match self {
            Self::All(v) => [v; 3],
            Self::Axes(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Color,
    Mean,
    Opacity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenePerturbConfig {
    pub gaussians: Vec<usize>,
    pub attribute: Attribute,
    #[serde(default)]
    pub component: usize,
    #[serde(default)]
    pub range: Option<[f64; 2]>,
    #[serde(default)]
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbConfig {
    #[serde(default)]
    pub eps_t: Radius,
    #[serde(default, rename = "eps_R")]
    pub eps_r: Radius,
    #[serde(default)]
    pub scene_perturbs: Vec<ScenePerturbConfig>,
    #[serde(default = "one")]
    pub parts: usize,
    #[serde(default)]
    pub independent: bool,
}

fn one() -> usize {
    1
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { eps_t: Radius::default(), eps_r: Radius::default(), scene_perturbs: Vec::new(), parts: 1, independent: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    Widest,
    RoundRobin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub tile: usize,
    pub batch: usize,
    pub k: usize,
    pub k_max: usize,
    pub tol: f64,
    pub d_min: f64,
    pub cull_eps: f64,
    pub max_split_depth: usize,
    pub split_axis: SplitRule,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub threads: usize,
    pub blender: String,
    pub samples: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let tc = TileConfig::default();
        let inv = InvOptions::default();
        Self {
            tile: tc.tile,
            batch: tc.batch,
            k: inv.k,
            k_max: inv.k_max,
            tol: inv.tol,
            d_min: tc.d_min,
            cull_eps: tc.cull_eps,
            max_split_depth: tc.max_split_depth,
            split_axis: SplitRule::Widest,
            seed: 0,
            threads: 0,
            blender: "ind".into(),
            samples: 1000,
        }
    }
}

fn cfg_err(m: impl Into<String>) -> CliError {
    CliError::config(m)
}

/// Parses `--set` values as JSON, falling back to a plain string.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `a.b.c=value` to a JSON tree, creating objects along the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("override {assignment:?} is not key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(cfg_err(format!("bad override key {path:?}")));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| cfg_err(format!("{path}: {key} is not inside an object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(|| cfg_err(format!("{path}: parent is not an object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), parse_value(raw));
    Ok(())
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_value(v).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; a relative scene path is resolved against the file's directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        let mut v: Value = serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        let mut cfg = Self::from_value(v)?;
        if cfg.scene.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.scene = dir.join(&cfg.scene);
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let e = &self.engine;
        if e.tile == 0 || e.batch == 0 {
            return Err(cfg_err("engine.tile and engine.batch must be positive"));
        }
        if e.k > e.k_max {
            return Err(cfg_err("engine.k must not exceed engine.k_max"));
        }
        if !(e.tol > 0.0) || !(e.d_min >= 0.0) || !(e.cull_eps >= 0.0) {
            return Err(cfg_err("engine.tol must be positive; d_min and cull_eps non-negative"));
        }
        if e.samples == 0 {
            return Err(cfg_err("engine.samples must be positive"));
        }
        self.blender()?;
        if self.perturb.parts == 0 {
            return Err(cfg_err("perturb.parts must be at least 1"));
        }
        for (i, p) in self.perturb.scene_perturbs.iter().enumerate() {
            if p.range.is_some() == p.half_width.is_some() {
                return Err(cfg_err(format!("scene_perturbs[{i}]: give exactly one of range or half_width")));
            }
        }
        Ok(())
    }

    pub fn blender(&self) -> Result<Blender, CliError> {
        self.engine.blender.parse().map_err(|_| cfg_err(format!("unknown blender {:?}", self.engine.blender)))
    }

    pub fn camera(&self) -> Result<Camera<f64>, CliError> {
        let c = &self.camera;
        Camera::new(c.euler, c.t, c.fx, c.fy, c.cx, c.cy, c.width, c.height).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn spec(&self) -> PerturbSpec<f64> {
        let p = &self.perturb;
        let scene = p
            .scene_perturbs
            .iter()
            .map(|s| {
                let attribute = match s.attribute {
                    Attribute::Color => SceneAttribute::Color(s.component),
                    Attribute::Mean => SceneAttribute::Mean(s.component),
                    Attribute::Opacity => SceneAttribute::Opacity,
                };
                match (s.range, s.half_width) {
                    (Some([lo, hi]), _) => ScenePerturb::range(s.gaussians.clone(), attribute, lo, hi),
                    (None, h) => ScenePerturb::half_width(s.gaussians.clone(), attribute, h.unwrap_or(0.0)),
                }
            })
            .collect();
        PerturbSpec { eps_t: p.eps_t.axes(), eps_r: p.eps_r.axes(), scene, parts: p.parts, independent: p.independent }
    }

    pub fn tiles(&self) -> TileConfig<f64> {
        let e = &self.engine;
        TileConfig {
            tile: e.tile,
            batch: e.batch,
            split_axis: match e.split_axis {
                SplitRule::Widest => SplitAxis::Widest,
                SplitRule::RoundRobin => SplitAxis::RoundRobin,
            },
            inv: InvOptions { k: e.k, tol: e.tol, k_max: e.k_max, skip_eps: false },
            d_min: e.d_min,
            cull_eps: e.cull_eps,
            max_split_depth: e.max_split_depth,
        }
    }

    pub fn render_options(&self) -> Result<RenderOptions<f64>, CliError> {
        Ok(RenderOptions { blender: self.blender()?, d_min: self.engine.d_min })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({"scene": "s.json", "camera": {"fx": 16, "fy": 16, "cx": 8, "cy": 8, "W": 16, "H": 16}})
    }

    #[test]
    fn minimal_config_defaults() {
        let c = RunConfig::from_value(base()).unwrap();
        assert_eq!(c.perturb.parts, 1);
        assert_eq!(c.engine.k, 8);
        assert_eq!(c.spec().eps_t, [0.0; 3]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = base();
        v["camera"]["fov"] = json!(1.0);
        assert!(RunConfig::from_value(v).is_err());
        let mut v = base();
        v["extra"] = json!(1);
        assert!(RunConfig::from_value(v).is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut v = base();
        apply_override(&mut v, "perturb.eps_t=0.2").unwrap();
        apply_override(&mut v, "engine.blender=sort").unwrap();
        apply_override(&mut v, "camera.t=[0,0,1]").unwrap();
        let c = RunConfig::from_value(v).unwrap();
        assert_eq!(c.spec().eps_t, [0.2; 3]);
        assert_eq!(c.blender().unwrap(), Blender::Sort);
        assert_eq!(c.camera.t, [0.0, 0.0, 1.0]);
        assert!(apply_override(&mut base(), "novalue").is_err());
    }

    #[test]
    fn scene_perturb_forms() {
        let mut v = base();
        v["perturb"] = json!({"scene_perturbs": [
            {"gaussians": [3, 7], "attribute": "color", "component": 0, "range": [0, 0.5]},
            {"gaussians": [0], "attribute": "mean", "component": 2, "half_width": 0.3}
        ]});
        let s = RunConfig::from_value(v).unwrap().spec();
        assert_eq!(s.scene[0].attribute, SceneAttribute::Color(0));
        assert_eq!((s.scene[1].lo, s.scene[1].hi), (-0.3, 0.3));
    }

    #[test]
    fn range_and_half_width_are_exclusive() {
        let mut v = base();
        v["perturb"] = json!({"scene_perturbs": [{"gaussians": [0], "attribute": "opacity", "range": [0, 0.1], "half_width": 0.1}]});
        assert!(RunConfig::from_value(v).is_err());
    }
}
