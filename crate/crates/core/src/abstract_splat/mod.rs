//! Abstract rendering: per-pixel color intervals valid for every camera and
//! scene in a perturbation box.

mod blend;
mod pipeline;

pub use blend::abstract_blend_ind;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matinv::InvOptions;
use crate::relax::{Interval, PerturbBox};
use crate::render::{pixel_center, Image, DEFAULT_D_MIN};
use crate::scalar::Scalar;
use crate::scene::{make_box, Bindings, Camera, PerturbSpec, Scene};
use pipeline::{lift_box, shade_pixel};

pub const DEFAULT_TILE: usize = 16;
pub const DEFAULT_BATCH: usize = 64;
pub const DEFAULT_CULL_EPS: f64 = 1e-6;
pub const DEFAULT_MAX_SPLIT_DEPTH: usize = 12;

/// Pixelwise lower and upper color images.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundImage<S> {
    pub lower: Image<S>,
    pub upper: Image<S>,
}

impl<S: Scalar> BoundImage<S> {
    pub fn from_image(img: &Image<S>) -> Self {
        Self { lower: img.clone(), upper: img.clone() }
    }

    pub fn width(&self) -> usize {
        self.lower.width
    }

    pub fn height(&self) -> usize {
        self.lower.height
    }

    fn zip(&self, other: &Self, lo: impl Fn(S, S) -> S, hi: impl Fn(S, S) -> S) -> Self {
        assert_eq!((self.width(), self.height()), (other.width(), other.height()), "image sizes differ");
        let merge = |a: &Image<S>, b: &Image<S>, f: &dyn Fn(S, S) -> S| Image {
            width: a.width,
            height: a.height,
            data: a.data.iter().zip(&b.data).map(|(p, q)| std::array::from_fn(|c| f(p[c], q[c]))).collect(),
        };
        Self { lower: merge(&self.lower, &other.lower, &lo), upper: merge(&self.upper, &other.upper, &hi) }
    }

    /// Pixelwise hull.
    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, S::min, S::max)
    }

    /// Pixelwise intersection of two sound bounds of the same set.
    pub fn intersect(&self, other: &Self) -> Self {
        self.zip(other, S::max, S::min)
    }

    /// Hull with one concrete image.
    pub fn include(&mut self, img: &Image<S>) {
        for ((lo, hi), p) in self.lower.data.iter_mut().zip(self.upper.data.iter_mut()).zip(&img.data) {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
    }

    /// Largest amount by which `img` leaves the bounds; zero when contained.
    pub fn max_violation(&self, img: &Image<S>) -> S {
        let mut worst = S::zero();
        for ((lo, hi), p) in self.lower.data.iter().zip(&self.upper.data).zip(&img.data) {
            for c in 0..3 {
                worst = worst.max(lo[c] - p[c]).max(p[c] - hi[c]);
            }
        }
        worst
    }

    pub fn contains(&self, img: &Image<S>, slack: S) -> bool {
        self.max_violation(img) <= slack
    }

    /// Whether `inner` lies inside these bounds up to `slack`.
    pub fn encloses(&self, inner: &Self, slack: S) -> bool {
        self.max_violation(&inner.lower) <= slack && self.max_violation(&inner.upper) <= slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitAxis {
    #[default]
    Widest,
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileConfig<S> {
    /// Tile edge in pixels.
    pub tile: usize,
    /// Gaussians per effective-opacity batch.
    pub batch: usize,
    pub split_axis: SplitAxis,
    pub inv: InvOptions<S>,
    pub d_min: S,
    /// Gaussians whose opacity is provably below this over a tile are dropped
    /// and their bound is added as slack.
    pub cull_eps: S,
    /// Splits allowed per box to recover from a failed contraction check.
    pub max_split_depth: usize,
}

impl<S: Scalar> Default for TileConfig<S> {
    fn default() -> Self {
        Self {
            tile: DEFAULT_TILE,
            batch: DEFAULT_BATCH,
            split_axis: SplitAxis::Widest,
            inv: InvOptions::default(),
            d_min: S::lit(DEFAULT_D_MIN),
            cull_eps: S::lit(DEFAULT_CULL_EPS),
            max_split_depth: DEFAULT_MAX_SPLIT_DEPTH,
        }
    }
}

impl<S: Scalar> TileConfig<S> {
    fn validate(&self) -> Result<()> {
        if self.tile == 0 || self.batch == 0 {
            return Err(Error::InvalidPerturbation("tile and batch sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AbstractStats {
    pub parts: usize,
    /// Boxes evaluated, including partition ancestors and contraction retries.
    pub boxes_evaluated: usize,
    pub contraction_splits: usize,
    pub depth_straddles: usize,
    pub culled_behind: usize,
    /// Largest number of Gaussians entering each tile, row-major.
    pub tile_gaussians: Vec<usize>,
    pub runtime_s: f64,
    /// Live affine forms times their size, for the largest box.
    pub working_set_bytes: usize,
}

impl AbstractStats {
    fn merge(&mut self, o: &Self) {
        self.boxes_evaluated += o.boxes_evaluated;
        self.contraction_splits += o.contraction_splits;
        self.depth_straddles += o.depth_straddles;
        self.culled_behind += o.culled_behind;
        if self.tile_gaussians.len() < o.tile_gaussians.len() {
            self.tile_gaussians.resize(o.tile_gaussians.len(), 0);
        }
        for (a, &b) in self.tile_gaussians.iter_mut().zip(&o.tile_gaussians) {
            *a = (*a).max(b);
        }
        self.working_set_bytes = self.working_set_bytes.max(o.working_set_bytes);
    }
}

/// Bounds of one pixel at position `u` over `domain`.
pub fn abstract_splat_pixel<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    bindings: &Bindings,
    domain: &PerturbBox<S>,
    u: [S; 2],
    cfg: &TileConfig<S>,
) -> Result<[Interval<S>; 3]> {
    let dom = Arc::new(domain.clone());
    let forms = lift_box(scene, cam, bindings, &dom, cfg)?;
    let cand: Vec<usize> = (0..forms.gaussians.len()).collect();
    shade_pixel(&forms, &cand, u, S::zero(), cfg)
}

fn pixel_span<S: Scalar>(lo: usize, hi: usize) -> Interval<S> {
    Interval::new(S::lit(lo as f64 + 0.5), S::lit(hi as f64 - 0.5))
}

/// One box, no partitioning or retries.
fn render_box<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    bindings: &Bindings,
    domain: &PerturbBox<S>,
    cfg: &TileConfig<S>,
) -> Result<(BoundImage<S>, AbstractStats)> {
    let dom = Arc::new(domain.clone());
    let forms = lift_box(scene, cam, bindings, &dom, cfg)?;
    let (w, h, ts) = (cam.width, cam.height, cfg.tile);
    let tiles_x = w.div_ceil(ts);
    let tiles: Vec<(usize, usize)> = (0..h.div_ceil(ts)).flat_map(|ty| (0..tiles_x).map(move |tx| (tx, ty))).collect();

    let results: Vec<(usize, Vec<[Interval<S>; 3]>)> = tiles
        .par_iter()
        .map(|&(tx, ty)| {
            let (x0, y0) = (tx * ts, ty * ts);
            let (x1, y1) = ((x0 + ts).min(w), (y0 + ts).min(h));
            let (sx, sy) = (pixel_span::<S>(x0, x1), pixel_span::<S>(y0, y1));
            let mut cand = Vec::new();
            let mut slack = S::zero();
            for (k, g) in forms.gaussians.iter().enumerate() {
                let bound = g.alpha_bound(sx, sy);
                if bound < cfg.cull_eps {
                    slack = slack + bound;
                } else {
                    cand.push(k);
                }
            }
            let mut px = Vec::with_capacity((x1 - x0) * (y1 - y0));
            for y in y0..y1 {
                for x in x0..x1 {
                    px.push(shade_pixel(&forms, &cand, pixel_center(x, y), slack, cfg)?);
                }
            }
            Ok((cand.len(), px))
        })
        .collect::<Result<_>>()?;

    let mut lower = Image::filled(w, h, [S::zero(); 3]);
    let mut upper = Image::filled(w, h, [S::zero(); 3]);
    let mut tile_gaussians = Vec::with_capacity(tiles.len());
    for (&(tx, ty), (count, px)) in tiles.iter().zip(results) {
        tile_gaussians.push(count);
        let (x0, y0) = (tx * ts, ty * ts);
        let x1 = (x0 + ts).min(w);
        for (i, p) in px.into_iter().enumerate() {
            let (x, y) = (x0 + i % (x1 - x0), y0 + i / (x1 - x0));
            lower.set(x, y, p.map(|iv| iv.lo));
            upper.set(x, y, p.map(|iv| iv.hi));
        }
    }
    let n = forms.gaussians.len();
    let live = n * 40 + n * n + tiles.len().min(rayon::current_num_threads()) * (n * n + 8 * n);
    let stats = AbstractStats {
        parts: 1,
        boxes_evaluated: 1,
        depth_straddles: forms.straddling,
        culled_behind: forms.behind,
        tile_gaussians,
        working_set_bytes: live * (2 * domain.dim() + 2) * 8,
        ..AbstractStats::default()
    };
    Ok((BoundImage { lower, upper }, stats))
}

fn split_axis<S: Scalar>(domain: &PerturbBox<S>, rule: SplitAxis, level: usize) -> Option<usize> {
    let widest = domain.widest_axis()?;
    match rule {
        SplitAxis::Widest => Some(widest),
        SplitAxis::RoundRobin => {
            let n = domain.dim();
            (0..n).map(|k| (level + k) % n).find(|&a| domain.var(a).width() > S::zero())
        }
    }
}

struct Ctx<'a, S> {
    scene: &'a Scene<S>,
    cam: &'a Camera<S>,
    bindings: &'a Bindings,
    cfg: &'a TileConfig<S>,
}

impl<S: Scalar> Ctx<'_, S> {
    /// Renders `domain`, splitting it in half when a contraction check fails.
    fn with_retry(&self, domain: &PerturbBox<S>, splits: usize) -> Result<(BoundImage<S>, AbstractStats)> {
        match render_box(self.scene, self.cam, self.bindings, domain, self.cfg) {
            Err(Error::GaussianContraction { gaussian, axis, .. }) => {
                let axis = axis.or_else(|| split_axis(domain, self.cfg.split_axis, splits));
                let Some(axis) = axis.filter(|_| splits < self.cfg.max_split_depth) else {
                    return Err(Error::UnrecoverableContraction { gaussian, splits });
                };
                log::debug!("contraction failed for gaussian {gaussian}; splitting axis {axis}");
                let (a, b) = domain.split(axis, S::half());
                let (ra, rb) = rayon::join(|| self.with_retry(&a, splits + 1), || self.with_retry(&b, splits + 1));
                let ((ia, mut sa), (ib, sb)) = (ra?, rb?);
                sa.merge(&sb);
                sa.contraction_splits += 1;
                Ok((ia.union(&ib), sa))
            }
            other => other,
        }
    }

    /// Partition into `parts` boxes; each box's bounds are intersected with its ancestors'.
    fn partition(
        &self,
        domain: &PerturbBox<S>,
        parts: usize,
        level: usize,
        parent: Option<&BoundImage<S>>,
    ) -> Result<(BoundImage<S>, AbstractStats)> {
        let (own, mut stats) = self.with_retry(domain, 0)?;
        let own = match parent {
            Some(p) => own.intersect(p),
            None => own,
        };
        let axis = split_axis(domain, self.cfg.split_axis, level);
        let (Some(axis), true) = (axis, parts > 1) else {
            return Ok((own, stats));
        };
        let left = parts / 2;
        let (a, b) = domain.split(axis, S::lit(left as f64 / parts as f64));
        let (ra, rb) = rayon::join(
            || self.partition(&a, left, level + 1, Some(&own)),
            || self.partition(&b, parts - left, level + 1, Some(&own)),
        );
        let ((ia, sa), (ib, sb)) = (ra?, rb?);
        stats.merge(&sa);
        stats.merge(&sb);
        Ok((ia.union(&ib), stats))
    }
}

/// Renders bounds for an explicit box and bindings, partitioned into `parts` sub-boxes.
pub fn abstract_render_box<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    bindings: &Bindings,
    domain: &PerturbBox<S>,
    parts: usize,
    cfg: &TileConfig<S>,
) -> Result<(BoundImage<S>, AbstractStats)> {
    cfg.validate()?;
    let start = Instant::now();
    let ctx = Ctx { scene, cam, bindings, cfg };
    let (img, mut stats) = ctx.partition(domain, parts.max(1), 0, None)?;
    stats.parts = parts.max(1);
    stats.runtime_s = start.elapsed().as_secs_f64();
    Ok((img, stats))
}

pub fn abstract_render<S: Scalar>(
    scene: &Scene<S>,
    cam: &Camera<S>,
    spec: &PerturbSpec<S>,
    cfg: &TileConfig<S>,
) -> Result<(BoundImage<S>, AbstractStats)> {
    let (domain, bindings) = make_box(spec, cam, scene)?;
    abstract_render_box(scene, cam, &bindings, &domain, spec.parts, cfg)
}

/// The leaves of the partition used by [`abstract_render`] for `parts`.
pub fn partition_box<S: Scalar>(domain: &PerturbBox<S>, parts: usize, rule: SplitAxis) -> Vec<PerturbBox<S>> {
    fn go<S: Scalar>(d: &PerturbBox<S>, parts: usize, rule: SplitAxis, level: usize, out: &mut Vec<PerturbBox<S>>) {
        match split_axis(d, rule, level) {
            Some(axis) if parts > 1 => {
                let left = parts / 2;
                let (a, b) = d.split(axis, S::lit(left as f64 / parts as f64));
                go(&a, left, rule, level + 1, out);
                go(&b, parts - left, rule, level + 1, out);
            }
            _ => out.push(d.clone()),
        }
    }
    let mut out = Vec::new();
    go(domain, parts.max(1), rule, 0, &mut out);
    out
}
