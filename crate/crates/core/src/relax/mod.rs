//! Linear bound propagation over an axis-aligned box of input variables.

mod domain;
mod form;
mod interval;
mod matrix_ops;
mod ops;

pub use domain::{BoxVar, PerturbBox};
pub use form::{AffineForm, LinearBound};
pub use interval::{cos_range, sin_range, Interval};
pub use matrix_ops::{
    concretize_matrix, constant_matrix, interval_from_points, interval_matmul, interval_norm_fro, relax_matmul,
    FormMatrix, IntervalMatrix,
};
pub use ops::{
    add, affine_compose, concretize, concretize_all, constant, constant_interval, constant_vector, input_var,
    offset, relax_cos, relax_div, relax_exp, relax_ind, relax_mul, relax_prod, relax_sin, relax_square, scale, sub,
    sum,
};
