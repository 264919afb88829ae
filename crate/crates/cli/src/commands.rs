use std::fmt::Write as _;
use std::path::Path;

use absplat_core::abstract_splat::{abstract_render, BoundImage};
use absplat_core::harness::{compute_metrics, example1, sample_envelope, sample_points};
use absplat_core::render::{render_image_with_stats, Image};
use absplat_core::scene::{lint_scene, load_ply, load_scene, make_box, Scene, DEFAULT_CONDITION_THRESHOLD};
use serde_json::{json, Value};

use crate::abim::{f32_down, f32_up, Abim};
use crate::config::RunConfig;
use crate::png_out::write_png;
use crate::{CliError, Cli, Command, RunArgs};

pub struct Report {
    pub text: String,
    pub json: Value,
}

pub fn load_any_scene(path: &Path) -> Result<Scene<f64>, CliError> {
    let scene = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")) {
        load_ply(path)
    } else {
        load_scene(path)
    };
    scene.map_err(|e| CliError { message: format!("{}: {e}", path.display()), ..CliError::scene(e) })
}

fn prepare(args: &RunArgs) -> Result<(RunConfig, Scene<f64>), CliError> {
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    let scene = load_any_scene(&cfg.scene)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    Ok((cfg, scene))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn flat(img: &Image<f64>, round: fn(f64) -> f32) -> Vec<f32> {
    img.data.iter().flatten().map(|&v| round(v)).collect()
}

fn write_bounds(out: &Path, stem: &str, b: &BoundImage<f64>) -> Result<Vec<String>, CliError> {
    let (w, h) = (b.width(), b.height());
    let names = [format!("{stem}lower.png"), format!("{stem}upper.png"), format!("{stem}bounds.abim")];
    write_png(&out.join(&names[0]), w, h, &b.lower.data)?;
    write_png(&out.join(&names[1]), w, h, &b.upper.data)?;
    Abim::pair(w as u32, h as u32, flat(&b.lower, f32_down), flat(&b.upper, f32_up)).save(&out.join(&names[2]))?;
    Ok(names.to_vec())
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("json serializes") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn lint_warnings(scene: &Scene<f64>) -> Vec<Value> {
    lint_scene(scene, DEFAULT_CONDITION_THRESHOLD)
        .into_iter()
        .map(|(i, cond)| {
            eprintln!("warning: gaussian {i} is near-singular (covariance condition {cond:.3e}); bounds may be loose");
            json!({"gaussian": i, "condition": cond})
        })
        .collect()
}

fn cmd_render(args: &RunArgs) -> Result<Report, CliError> {
    let (cfg, scene) = prepare(args)?;
    let cam = cfg.camera()?;
    let opts = cfg.render_options()?;
    let start = std::time::Instant::now();
    let (img, stats) = with_threads(cfg.engine.threads, || render_image_with_stats(&scene, &cam, &opts))?
        .map_err(CliError::numeric)?;
    let runtime_s = start.elapsed().as_secs_f64();
    write_png(&args.out.join("render.png"), img.width, img.height, &img.data)?;
    Abim::single(img.width as u32, img.height as u32, flat(&img, |v| v as f32)).save(&args.out.join("render.abim"))?;
    let json = json!({
        "width": img.width, "height": img.height, "gaussians": scene.len(),
        "culled": stats.culled, "runtime_s": runtime_s,
        "files": ["render.png", "render.abim"],
    });
    let text = format!(
        "rendered {}x{} from {} gaussians ({} culled) in {:.3}s\n",
        img.width, img.height, scene.len(), stats.culled, runtime_s
    );
    Ok(Report { text, json })
}

fn cmd_abstract(args: &RunArgs, check: usize) -> Result<Report, CliError> {
    let (cfg, scene) = prepare(args)?;
    let lint = lint_warnings(&scene);
    let cam = cfg.camera()?;
    let spec = cfg.spec();
    let tiles = cfg.tiles();
    let opts = cfg.render_options()?;
    let (bounds, stats, violations) = with_threads(cfg.engine.threads, || -> Result<_, CliError> {
        let (bounds, stats) = abstract_render(&scene, &cam, &spec, &tiles).map_err(CliError::numeric)?;
        let mut violations = 0;
        if check > 0 {
            let (_, bindings) = make_box(&spec, &cam, &scene).map_err(CliError::numeric)?;
            for x in sample_points(&scene, &cam, &spec, check, cfg.engine.seed).map_err(CliError::numeric)? {
                let (c, s) = bindings.apply(&x, &cam, &scene);
                let img = absplat_core::render::render_image(&s, &c, &opts).map_err(CliError::numeric)?;
                if !bounds.contains(&img, 1e-6) {
                    violations += 1;
                }
            }
        }
        Ok((bounds, stats, violations))
    })??;
    let files = write_bounds(&args.out, "", &bounds)?;
    let m = compute_metrics(&bounds);
    let metrics = json!({
        "mpg": m.mpg, "xpg": m.xpg, "runtime_s": stats.runtime_s,
        "parts": stats.parts, "violations": violations,
    });
    write_json(&args.out.join("metrics.json"), &metrics)?;
    let json = json!({
        "metrics": metrics,
        "checked_samples": check,
        "boxes_evaluated": stats.boxes_evaluated,
        "contraction_splits": stats.contraction_splits,
        "depth_straddles": stats.depth_straddles,
        "culled_behind": stats.culled_behind,
        "tile_gaussians": stats.tile_gaussians,
        "working_set_bytes": stats.working_set_bytes,
        "lint": lint,
        "files": files.iter().chain(std::iter::once(&"metrics.json".to_string())).collect::<Vec<_>>(),
    });
    let mut text = format!(
        "mpg {:.6} xpg {:.6} parts {} boxes {} splits {} runtime {:.3}s\n",
        m.mpg, m.xpg, stats.parts, stats.boxes_evaluated, stats.contraction_splits, stats.runtime_s
    );
    if check > 0 {
        let _ = writeln!(text, "{violations} of {check} sampled renders outside the bounds");
    }
    Ok(Report { text, json })
}

fn cmd_sample(args: &RunArgs, samples: Option<usize>) -> Result<Report, CliError> {
    let (cfg, scene) = prepare(args)?;
    let cam = cfg.camera()?;
    let spec = cfg.spec();
    let opts = cfg.render_options()?;
    let n = samples.unwrap_or(cfg.engine.samples);
    if n == 0 {
        return Err(CliError::config("need at least one sample"));
    }
    let start = std::time::Instant::now();
    let env = with_threads(cfg.engine.threads, || sample_envelope(&scene, &cam, &spec, n, cfg.engine.seed, &opts))?
        .map_err(CliError::numeric)?;
    let runtime_s = start.elapsed().as_secs_f64();
    write_bounds(&args.out, "sample_", &env)?;
    let m = compute_metrics(&env);
    let metrics = json!({"mpg": m.mpg, "xpg": m.xpg, "runtime_s": runtime_s, "samples": n, "seed": cfg.engine.seed});
    write_json(&args.out.join("sample_metrics.json"), &metrics)?;
    let text = format!("empirical mpg {:.6} xpg {:.6} from {n} samples\n", m.mpg, m.xpg);
    Ok(Report { text, json: metrics })
}

fn cmd_metrics(path: &Path) -> Result<Report, CliError> {
    let a = Abim::load(path)?;
    let upper = a.upper.clone().unwrap_or_else(|| a.lower.clone());
    let to_img = |v: &[f32]| Image {
        width: a.width as usize,
        height: a.height as usize,
        data: v.chunks_exact(3).map(|c| [c[0] as f64, c[1] as f64, c[2] as f64]).collect(),
    };
    let m = compute_metrics(&BoundImage { lower: to_img(&a.lower), upper: to_img(&upper) });
    Ok(Report { text: format!("mpg {:.6} xpg {:.6}\n", m.mpg, m.xpg), json: json!({"mpg": m.mpg, "xpg": m.xpg}) })
}

fn cmd_lint(path: &Path, threshold: f64) -> Result<Report, CliError> {
    let scene = load_any_scene(path)?;
    let flagged = lint_scene(&scene, threshold);
    let mut text = format!("{} of {} gaussians exceed condition {threshold:e}\n", flagged.len(), scene.len());
    for (i, c) in &flagged {
        let _ = writeln!(text, "  gaussian {i}: condition {c:.3e}");
    }
    let json = json!({
        "threshold": threshold,
        "flagged": flagged.iter().map(|(i, c)| json!({"gaussian": i, "condition": c})).collect::<Vec<_>>(),
    });
    Ok(Report { text, json })
}

fn cmd_example1(k: usize, samples: usize, seed: u64) -> Result<Report, CliError> {
    let start = std::time::Instant::now();
    let r = example1(k, samples.max(1), seed).map_err(CliError::numeric)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let text = format!(
        "adjugate width {:.4} (interval {:.4})\ntaylor width {:.4} (interval {:.4}, k={})\nsampled width {:.4} ({} samples)\n",
        r.adjugate, r.adjugate_interval, r.taylor, r.taylor_interval, r.k, r.sampled, r.samples
    );
    let mut json = serde_json::to_value(&r).expect("report serializes");
    json["runtime_s"] = json!(runtime_s);
    Ok(Report { text, json })
}

pub fn run(cli: Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Render(a) => cmd_render(a),
        Command::Abstract { run, check } => cmd_abstract(run, *check),
        Command::Sample { run, samples } => cmd_sample(run, *samples),
        Command::Metrics { bounds } => cmd_metrics(bounds),
        Command::Lint { scene, threshold } => cmd_lint(scene, *threshold),
        Command::Example1 { k, samples, seed } => cmd_example1(*k, *samples, *seed),
    }
}
