use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::matinv::{adjugate_inverse_affine, adjugate_inverse_interval, center_reference, matrix_inv_enclose, matrix_inv_enclose_affine, InvOptions};
use crate::matrix::{point, Matrix};
use crate::relax::{concretize_matrix, input_var, FormMatrix, Interval, IntervalMatrix, PerturbBox};

/// Elementwise bounds of the 2×2 interval matrix used in the worked example.
pub fn example1_bounds() -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    ([[0.60, -0.02], [-0.02, 0.90]], [[0.90, 0.02], [0.02, 1.30]])
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Report {
    /// Series enclosure with one input variable per entry.
    pub taylor: f64,
    /// Series enclosure in plain interval arithmetic.
    pub taylor_interval: f64,
    pub adjugate: f64,
    pub adjugate_interval: f64,
    pub sampled: f64,
    pub k: usize,
    pub samples: usize,
}

fn width(lo: &Matrix<f64>, hi: &Matrix<f64>) -> f64 {
    lo.iter().zip(hi.iter()).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

fn form_width(f: &FormMatrix<f64>) -> f64 {
    let r = concretize_matrix(f);
    r.iter().map(|iv| iv.width() * iv.width()).sum::<f64>().sqrt()
}

fn interval_width(m: &IntervalMatrix<f64>) -> f64 {
    m.iter().map(|iv| iv.width() * iv.width()).sum::<f64>().sqrt()
}

pub fn example1(k: usize, samples: usize, seed: u64) -> Result<Example1Report> {
    let (lo, hi) = example1_bounds();
    let bounds: Vec<(f64, f64)> = (0..4).map(|i| (lo[i / 2][i % 2], hi[i / 2][i % 2])).collect();
    let domain = Arc::new(PerturbBox::from_bounds(&bounds)?);
    let x: FormMatrix<f64> = Matrix::from_vec(2, 2, (0..4).map(|i| input_var(i, &domain)).collect::<Result<_>>()?)?;
    let xi: IntervalMatrix<f64> = Matrix::from_vec(2, 2, bounds.iter().map(|&(a, b)| Interval::new(a, b)).collect())?;

    let affine = matrix_inv_enclose_affine(&x, &InvOptions::fixed(k))?;
    let interval = matrix_inv_enclose(&xi, &center_reference(&xi)?, k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mn = Matrix::filled(2, 2, f64::INFINITY);
    let mut mx = Matrix::filled(2, 2, f64::NEG_INFINITY);
    for _ in 0..samples {
        let m = Matrix::from_vec(2, 2, bounds.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect())?;
        let inv = point::inverse(&m)?;
        for (i, v) in inv.iter().enumerate() {
            let (r, c) = (i / 2, i % 2);
            mn[(r, c)] = mn[(r, c)].min(*v);
            mx[(r, c)] = mx[(r, c)].max(*v);
        }
    }

    Ok(Example1Report {
        taylor: form_width(&affine.union()),
        taylor_interval: interval.width(),
        adjugate: form_width(&adjugate_inverse_affine(&x)?),
        adjugate_interval: interval_width(&adjugate_inverse_interval(&xi)?),
        sampled: width(&mn, &mx),
        k,
        samples,
    })
}
