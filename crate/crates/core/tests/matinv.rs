use std::sync::Arc;

use absplat_core::harness::example1_bounds;
use absplat_core::matinv::{
    adjugate_inverse_interval, auto_tune, center_reference, matrix_inv_enclose, matrix_inv_enclose_affine,
    InvOptions,
};
use absplat_core::matrix::point;
use absplat_core::relax::{concretize_matrix, input_var, Interval, IntervalMatrix, PerturbBox};
use absplat_core::{Error, Matrix};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random SPD center with entry radii small relative to its smallest eigenvalue.
fn random_spd_interval(rng: &mut ChaCha8Rng) -> IntervalMatrix<f64> {
    let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
    let (l1, l2) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0));
    let (c, s) = (th.cos(), th.sin());
    let center = [
        [c * c * l1 + s * s * l2, c * s * (l1 - l2)],
        [c * s * (l1 - l2), s * s * l1 + c * c * l2],
    ];
    let rmax = 0.3 * l1.min(l2);
    Matrix::from_fn(2, 2, |r, k| {
        let rad = rng.random_range(0.0..rmax);
        Interval::new(center[r][k] - rad, center[r][k] + rad)
    })
}

fn draw(rng: &mut ChaCha8Rng, x: &IntervalMatrix<f64>) -> Matrix2<f64> {
    Matrix2::from_fn(|r, c| {
        let iv = x[(r, c)];
        iv.lo + rng.random::<f64>() * iv.width()
    })
}

#[test]
fn sampled_inverses_are_contained() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut inputs = 0;
    while inputs < 1000 {
        let x = random_spd_interval(&mut rng);
        let x0 = center_reference(&x).unwrap();
        let enc = match matrix_inv_enclose(&x, &x0, 8) {
            Ok(e) => e,
            Err(Error::ContractionViolated { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        inputs += 1;
        for _ in 0..20 {
            let Some(inv) = draw(&mut rng, &x).try_inverse() else { continue };
            for r in 0..2 {
                for c in 0..2 {
                    let v = inv[(r, c)];
                    let e = 1e-9 * v.abs().max(1.0);
                    assert!(enc.lower[(r, c)] - e <= v && v <= enc.upper[(r, c)] + e);
                }
            }
        }
    }
}

#[test]
fn remainder_shrinks_with_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut inputs = 0;
    while inputs < 200 {
        let x = random_spd_interval(&mut rng);
        let x0 = center_reference(&x).unwrap();
        let Ok(first) = matrix_inv_enclose(&x, &x0, 0) else { continue };
        inputs += 1;
        let mut prev = first.eps;
        for k in 1..=20 {
            let e = matrix_inv_enclose(&x, &x0, k).unwrap().eps;
            assert!(e <= prev, "eps rose from {prev} to {e} at k={k}");
            prev = e;
        }
    }
}

#[test]
fn tolerance_reached_for_half_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut inputs = 0;
    while inputs < 300 {
        // the remainder scales with ‖X0‖ while the contraction is scale-free, so
        // fix ‖X0‖_F = 1; then eps(20) <= 0.5^21 / 0.5 < 1e-6
        let raw = random_spd_interval(&mut rng);
        let s = point::frobenius(&center_reference(&raw).unwrap());
        let x = raw.map(|iv| iv.scale(s));
        let x0 = center_reference(&x).unwrap();
        let Ok(probe) = matrix_inv_enclose(&x, &x0, 0) else { continue };
        if probe.contraction > 0.5 {
            continue;
        }
        inputs += 1;
        let enc = auto_tune(&x, 1e-6, 20).unwrap();
        assert!(enc.eps < 1e-6 && enc.k_used <= 20, "contraction {} ‖X0‖ {}: eps {} at k={}", probe.contraction, point::frobenius(&x0), enc.eps, enc.k_used);
    }
}

#[test]
fn exact_reference_needs_no_remainder() {
    let a: Matrix<f64> = Matrix::from_rows(vec![[2.0, 0.5], [0.5, 1.0]]);
    let x = a.map(|&v| Interval::point(v));
    let inv = point::inverse(&a).unwrap();
    let enc = matrix_inv_enclose(&x, &inv, 0).unwrap();
    assert!(enc.eps < 1e-15);
    for (l, (u, t)) in enc.lower.iter().zip(enc.upper.iter().zip(inv.iter())) {
        assert!((l - t).abs() < 1e-15 && (u - t).abs() < 1e-15);
    }
}

#[test]
fn series_beats_adjugate_on_worked_example() {
    let (lo, hi) = example1_bounds();
    let x = Matrix::from_fn(2, 2, |r, c| Interval::new(lo[r][c], hi[r][c]));
    let x0 = center_reference(&x).unwrap();
    let enc = matrix_inv_enclose(&x, &x0, 8).unwrap();
    let adj = adjugate_inverse_interval(&x).unwrap();
    let w = |m: &IntervalMatrix<f64>| m.iter().map(|iv| iv.width().powi(2)).sum::<f64>().sqrt();
    assert!(enc.width() < w(&adj));

    let tuned = auto_tune(&x, 1e-3, 20).unwrap();
    assert!(tuned.eps < 1e-3 && tuned.k_used <= 20);
}

fn lifted(bounds: &[(f64, f64)], lo: [[f64; 2]; 2], hi: [[f64; 2]; 2]) -> absplat_core::relax::FormMatrix<f64> {
    // entry (r, c) sweeps lo..hi with its own box variable in [0, 1]
    let d = Arc::new(PerturbBox::from_bounds(bounds).unwrap());
    Matrix::from_fn(2, 2, |r, c| {
        let t = input_var(r * 2 + c, &d).unwrap();
        absplat_core::relax::affine_compose(&[hi[r][c] - lo[r][c]], lo[r][c], &[&t]).unwrap()
    })
}

#[test]
fn affine_variant_is_exact_on_points() {
    let a = [[1.5, 0.2], [0.1, 0.8]];
    let f = lifted(&[(0.0, 0.0); 4], a, a);
    let enc = matrix_inv_enclose_affine(&f, &InvOptions::default()).unwrap().union();
    let inv = point::inverse(&Matrix::from_rows(vec![a[0], a[1]])).unwrap();
    for (iv, t) in concretize_matrix(&enc).iter().zip(inv.iter()) {
        assert!((iv.lo - t).abs() < 1e-8 && (iv.hi - t).abs() < 1e-8);
    }
}

#[test]
fn affine_variant_sound_and_no_wider_than_interval() {
    let (lo, hi) = example1_bounds();
    let f = lifted(&[(0.0, 1.0); 4], lo, hi);
    let enc = matrix_inv_enclose_affine(&f, &InvOptions::fixed(8)).unwrap().union();
    let x = Matrix::from_fn(2, 2, |r, c| Interval::new(lo[r][c], hi[r][c]));
    let interval = matrix_inv_enclose(&x, &center_reference(&x).unwrap(), 8).unwrap();
    let widths: f64 = concretize_matrix(&enc).iter().map(|iv| iv.width().powi(2)).sum::<f64>().sqrt();
    assert!(widths <= interval.width() + 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let t: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        let m = Matrix2::from_fn(|r, c| lo[r][c] + t[r * 2 + c] * (hi[r][c] - lo[r][c]));
        let inv = m.try_inverse().unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let v = inv[(r, c)];
                assert!(enc[(r, c)].eval_lower(&t) <= v + 1e-9 && v <= enc[(r, c)].eval_upper(&t) + 1e-9);
            }
        }
    }
}

#[test]
fn affine_variant_sound_over_random_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut inputs = 0;
    while inputs < 50 {
        let x = random_spd_interval(&mut rng);
        let lo = [[x[(0, 0)].lo, x[(0, 1)].lo], [x[(1, 0)].lo, x[(1, 1)].lo]];
        let hi = [[x[(0, 0)].hi, x[(0, 1)].hi], [x[(1, 0)].hi, x[(1, 1)].hi]];
        let f = lifted(&[(0.0, 1.0); 4], lo, hi);
        let Ok(enc) = matrix_inv_enclose_affine(&f, &InvOptions::default()) else { continue };
        let enc = enc.union();
        inputs += 1;
        for _ in 0..20 {
            let t: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let m = Matrix2::from_fn(|r, c| lo[r][c] + t[r * 2 + c] * (hi[r][c] - lo[r][c]));
            let Some(inv) = m.try_inverse() else { continue };
            for r in 0..2 {
                for c in 0..2 {
                    let v = inv[(r, c)];
                    let e = 1e-9 * v.abs().max(1.0);
                    assert!(enc[(r, c)].eval_lower(&t) <= v + e && v <= enc[(r, c)].eval_upper(&t) + e);
                }
            }
        }
    }
}
