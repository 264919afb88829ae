use nalgebra::DMatrix;

use super::Scene;
use crate::scalar::Scalar;

pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e4;

/// Spectral condition number of a symmetric `n×n` matrix given row-major.
/// Returns infinity when the smallest eigenvalue is not positive.
pub fn covariance_condition(cov: &[f64], n: usize) -> f64 {
    assert_eq!(cov.len(), n * n, "covariance must be n×n");
    let eig = DMatrix::from_row_slice(n, n, cov).symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Gaussians whose covariance condition number exceeds `threshold`.
pub fn lint_scene<S: Scalar>(scene: &Scene<S>, threshold: f64) -> Vec<(usize, f64)> {
    scene
        .gaussians
        .iter()
        .enumerate()
        .filter_map(|(i, g)| {
            let cov: Vec<f64> = g.covariance().iter().flatten().map(|v| v.as_f64()).collect();
            let cond = covariance_condition(&cov, 3);
            (cond > threshold).then(|| {
                log::warn!("gaussian {i} is near-singular (condition {cond:.3e})");
                (i, cond)
            })
        })
        .collect()
}
