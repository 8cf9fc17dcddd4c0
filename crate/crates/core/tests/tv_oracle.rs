mod common;

use common::{image, padded, rng, uniform};
use phaseret::grid::crop;
use phaseret::tv::{laplacian, tv_norm, x_update, TvMode};
use phaseret::{ImageGrid, MeasurementPlan, PaddedGrid};
use proptest::prelude::*;

/// Forward differences as explicit per-pixel pairs; zero across the far edge.
fn diffs(x: &ImageGrid) -> Vec<(f64, f64)> {
    let (r, c) = x.dims();
    let mut out = Vec::new();
    for i in 0..r {
        for j in 0..c {
            let dh = if j + 1 == c { 0.0 } else { x.get(i, j + 1) - x.get(i, j) };
            let dv = if i + 1 == r { 0.0 } else { x.get(i + 1, j) - x.get(i, j) };
            out.push((dh, dv));
        }
    }
    out
}

/// `−Dᵀ D x` with D the forward-difference operator assembled as a dense matrix.
fn laplacian_oracle(x: &ImageGrid) -> Vec<f64> {
    let (r, c) = x.dims();
    let n = r * c;
    let mut d = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                let mut row = vec![0.0; n];
                row[i * c + j] = -1.0;
                row[i * c + j + 1] = 1.0;
                d.push(row);
            }
            if i + 1 < r {
                let mut row = vec![0.0; n];
                row[i * c + j] = -1.0;
                row[(i + 1) * c + j] = 1.0;
                d.push(row);
            }
        }
    }
    let dx: Vec<f64> = d.iter().map(|row| row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum()).collect();
    (0..n).map(|k| -d.iter().zip(&dx).map(|(row, v)| row[k] * v).sum::<f64>()).collect()
}

#[test]
fn tv_matches_brute_force() {
    let mut r = rng(31);
    for (rows, cols) in [(1, 1), (1, 6), (5, 1), (7, 9)] {
        let x = image(&mut r, rows, cols);
        let d = diffs(&x);
        let iso: f64 = d.iter().map(|(a, b)| (a * a + b * b).sqrt()).sum();
        let aniso: f64 = d.iter().map(|(a, b)| a.abs() + b.abs()).sum();
        assert!((tv_norm(&x, TvMode::Isotropic) - iso).abs() < 1e-12);
        assert!((tv_norm(&x, TvMode::Anisotropic) - aniso).abs() < 1e-12);
    }
}

#[test]
fn laplacian_is_minus_dtd() {
    let mut r = rng(32);
    for (rows, cols) in [(1, 5), (4, 1), (6, 7), (2, 2)] {
        let x = image(&mut r, rows, cols);
        let got = laplacian(&x);
        for (a, b) in got.as_slice().iter().zip(laplacian_oracle(&x)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn x_update_matches_compositional_oracle() {
    let mut r = rng(33);
    let plan = MeasurementPlan::new(5, 6, 9, 11).unwrap();
    for (rho, alpha) in [(1.0, 1.0 / 384.0), (0.5, 0.2), (3.0, 0.0)] {
        let v = padded(&mut r, 9, 11);
        let eta = padded(&mut r, 9, 11);
        let shifted = PaddedGrid::new(
            9,
            11,
            v.as_slice().iter().zip(eta.as_slice()).map(|(a, e)| a + e / rho).collect(),
        )
        .unwrap();
        let w = crop(&shifted, &plan).unwrap();
        let expected = w.lin_comb(1.0, &laplacian(&w), -alpha / rho);
        let got = x_update(&v, &eta, rho, alpha, &plan).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-12);
    }
}

#[test]
fn x_update_rejects_bad_inputs() {
    let plan = MeasurementPlan::new(2, 2, 4, 4).unwrap();
    let z = PaddedGrid::zeros(4, 4);
    assert!(x_update(&z, &z, 0.0, 0.1, &plan).is_err());
    assert!(x_update(&PaddedGrid::zeros(3, 4), &z, 1.0, 0.1, &plan).is_err());
}

fn img_strategy() -> impl Strategy<Value = ImageGrid> {
    (1usize..8, 1usize..8, any::<u64>())
        .prop_map(|(r, c, s)| ImageGrid::new(r, c, uniform(&mut rng(s), r * c, -2.0, 2.0)).unwrap())
}

proptest! {
    #[test]
    fn tv_is_absolutely_homogeneous(x in img_strategy(), a in -5.0f64..5.0) {
        for mode in [TvMode::Isotropic, TvMode::Anisotropic] {
            let lhs = tv_norm(&x.map(|v| a * v), mode);
            let rhs = a.abs() * tv_norm(&x, mode);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }
    }

    #[test]
    fn tv_ignores_constant_offsets_and_bounds(x in img_strategy(), c in -5.0f64..5.0) {
        let iso = tv_norm(&x, TvMode::Isotropic);
        let aniso = tv_norm(&x, TvMode::Anisotropic);
        prop_assert!((tv_norm(&x.map(|v| v + c), TvMode::Isotropic) - iso).abs() < 1e-9);
        prop_assert!(iso <= aniso + 1e-12);
        prop_assert!(aniso <= std::f64::consts::SQRT_2 * iso + 1e-12);
    }

    #[test]
    fn laplacian_sums_to_zero_and_is_linear(x in img_strategy(), a in -3.0f64..3.0, s in any::<u64>()) {
        let (r, c) = x.dims();
        let y = ImageGrid::new(r, c, uniform(&mut rng(s), r * c, -2.0, 2.0)).unwrap();
        prop_assert!(laplacian(&x).sum().abs() < 1e-11);
        let lhs = laplacian(&x.lin_comb(a, &y, 1.0));
        let rhs = laplacian(&x).lin_comb(a, &laplacian(&y), 1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-11);
    }

    #[test]
    fn x_update_is_affine(s in any::<u64>(), t in -2.0f64..2.0) {
        let mut r = rng(s);
        let plan = MeasurementPlan::new(3, 4, 6, 7).unwrap();
        let (v1, v2, e1, e2) = (padded(&mut r, 6, 7), padded(&mut r, 6, 7), padded(&mut r, 6, 7), padded(&mut r, 6, 7));
        let mix = |a: &PaddedGrid, b: &PaddedGrid| a.lin_comb(t, b, 1.0 - t);
        let lhs = x_update(&mix(&v1, &v2), &mix(&e1, &e2), 0.7, 0.3, &plan).unwrap();
        let x1 = x_update(&v1, &e1, 0.7, 0.3, &plan).unwrap();
        let x2 = x_update(&v2, &e2, 0.7, 0.3, &plan).unwrap();
        prop_assert!(lhs.max_abs_diff(&x1.lin_comb(t, &x2, 1.0 - t)) < 1e-11);
    }
}
