//! Concrete and abstract rendering of 3D Gaussian splats.
//!
//! The abstract renderer takes a box of camera poses and scene parameters and
//! returns per-pixel lower and upper color bounds that contain every concrete
//! rendering from the box. All numeric code is generic over [`Scalar`]; the
//! aliases below fix it to `f64`.

pub mod abstract_splat;
pub mod error;
pub mod harness;
pub mod matinv;
pub mod matrix;
pub mod relax;
pub mod render;
pub mod scalar;
pub mod scene;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

pub type Interval = relax::Interval<f64>;
pub type PerturbBox = relax::PerturbBox<f64>;
pub type AffineForm = relax::AffineForm<f64>;
pub type LinearBound = relax::LinearBound<f64>;
pub type InvEnclosure = matinv::InvEnclosure<f64>;
pub type InvOptions = matinv::InvOptions<f64>;
pub type Gaussian3D = scene::Gaussian3D<f64>;
pub type Scene = scene::Scene<f64>;
pub type Camera = scene::Camera<f64>;
pub type PerturbSpec = scene::PerturbSpec<f64>;
pub type ScenePerturb = scene::ScenePerturb<f64>;
pub type Image = render::Image<f64>;
pub type RenderOptions = render::RenderOptions<f64>;
pub type BoundImage = abstract_splat::BoundImage<f64>;
pub type TileConfig = abstract_splat::TileConfig<f64>;
