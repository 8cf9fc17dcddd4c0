mod common;

use common::{image, rng};
use phaseret::forward::{
    add_noise, measure, plan_from_ratio, population_variance, sigma_for_snr, simulate, snr_for_sigma,
};
use phaseret::grid::{crop, pad};
use phaseret::metrics::{circular_shift, rotate180};
use phaseret::MeasurementPlan;

#[test]
fn plan_rounds_sides() {
    let p = plan_from_ratio(32, 20, 1.6).unwrap();
    assert_eq!(p.measurement_dims(), (51, 32));
    assert_eq!(plan_from_ratio(64, 64, 2.0).unwrap().measurement_dims(), (128, 128));
    assert!(plan_from_ratio(8, 8, 0.9).is_err());
}

#[test]
fn magnitudes_ignore_shift_and_conjugate_flip_within_the_padded_grid() {
    let x = image(&mut rng(51), 6, 6);
    let plan = MeasurementPlan::new(6, 6, 12, 12).unwrap();
    let b = measure(&x, &plan).unwrap();
    let px = pad(&x, &plan).unwrap();
    let as_image = phaseret::ImageGrid::new(12, 12, px.as_slice().to_vec()).unwrap();
    for moved in [circular_shift(&as_image, 3, 5), rotate180(&as_image)] {
        let full = MeasurementPlan::new(12, 12, 12, 12).unwrap();
        let bm = measure(&moved, &full).unwrap();
        assert!(bm.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn pad_then_crop_is_identity() {
    let x = image(&mut rng(52), 5, 7);
    let plan = MeasurementPlan::new(5, 7, 9, 13).unwrap();
    assert_eq!(crop(&pad(&x, &plan).unwrap(), &plan).unwrap(), x);
}

#[test]
fn noise_hits_the_requested_snr() {
    let x = image(&mut rng(53), 32, 32);
    let plan = plan_from_ratio(32, 32, 2.0).unwrap();
    let b = measure(&x, &plan).unwrap();
    let sigma = sigma_for_snr(&b, 20.0).unwrap();
    assert!((snr_for_sigma(&b, sigma).unwrap() - 20.0).abs() < 1e-12);
    let noisy = add_noise(&b, sigma, 7).unwrap();
    let resid: Vec<f64> = noisy.as_slice().iter().zip(b.as_slice()).map(|(a, c)| a - c).collect();
    let measured = population_variance(&resid).sqrt();
    assert!((measured / sigma - 1.0).abs() < 0.05);
    assert_eq!(add_noise(&b, sigma, 7).unwrap(), noisy);
    assert_ne!(add_noise(&b, sigma, 8).unwrap(), noisy);
}

#[test]
fn simulate_is_deterministic_and_records_noise() {
    let x = image(&mut rng(54), 8, 8);
    let plan = plan_from_ratio(8, 8, 1.5).unwrap();
    let (b1, n1) = simulate(&x, &plan, Some(10.0), 3).unwrap();
    let (b2, n2) = simulate(&x, &plan, Some(10.0), 3).unwrap();
    assert_eq!(b1, b2);
    assert_eq!(n1, n2);
    assert!(n1.sigma > 0.0);
    let (b0, n0) = simulate(&x, &plan, None, 3).unwrap();
    assert!(n0.is_noiseless());
    assert_eq!(b0, measure(&x, &plan).unwrap());
}
