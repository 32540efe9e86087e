//! Statistical checks of the Monte-Carlo noise sampler against closed-form
//! moments and the deterministic rate quadrature.

use odcm_core::control::*;
use odcm_core::mc::*;
use odcm_core::rate::rate_time_domain;
use odcm_core::spectra::*;
use odcm_core::TimeGrid;

#[test]
fn covariance_factor_reconstructs_the_kernel() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(10.0, 256).unwrap();
    let factor = CovarianceFactor::new(&c, grid).unwrap();
    let err = factor.reconstruction_error(&c);
    assert!(
        err <= 1e-8 * c.variance_scale(),
        "max |B B^T - Sigma| = {err}"
    );
}

#[test]
fn sample_variance_matches_the_lag_zero_kernel() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(2.0, 32).unwrap();
    let count = 4000;
    let batch = sample_noise(&c, grid, count, 7).unwrap();
    let var0 = c.variance_scale();
    // sample variance of chi^2 mean: sd ~ var0 * sqrt(2/K)
    let bound = 5.0 * var0 * (2.0 / count as f64).sqrt();
    for idx in [0, 15, 31] {
        let mean_sq = batch
            .realizations()
            .iter()
            .map(|r| r[idx] * r[idx])
            .sum::<f64>()
            / count as f64;
        assert!(
            (mean_sq - var0).abs() <= bound,
            "variance at sample {idx}: {mean_sq} vs {var0} (bound {bound})"
        );
    }
}

#[test]
fn sample_covariance_decays_like_the_envelope() {
    let t_c = 0.5;
    let c = lorentzian_correlation(1.0, t_c).unwrap();
    let grid = TimeGrid::new(2.0, 33).unwrap();
    let count = 4000;
    let batch = sample_noise(&c, grid, count, 11).unwrap();
    // lag exactly t_c: 8 grid steps of h = 0.0625
    let lag_steps = (t_c / grid.spacing()).round() as usize;
    assert!((lag_steps as f64 * grid.spacing() - t_c).abs() < 1e-12);
    let cov = batch
        .realizations()
        .iter()
        .map(|r| r[8] * r[8 + lag_steps])
        .sum::<f64>()
        / count as f64;
    let expect = c.envelope(t_c);
    let bound = 5.0 * c.variance_scale() * (2.0 / count as f64).sqrt();
    assert!(
        (cov - expect).abs() <= bound,
        "covariance at lag t_c: {cov} vs {expect} (bound {bound})"
    );
}

#[test]
fn unmodulated_rate_within_three_sigma_of_closed_form() {
    let gamma = 1.0;
    let t_c = 1.0;
    let t_total = 10.0;
    let c = lorentzian_correlation(gamma, t_c).unwrap();
    let grid = TimeGrid::new(t_total, 256).unwrap();
    let batch = sample_noise(&c, grid, 10_000, 42).unwrap();
    let zero = ControlField::zero(grid);
    let (rhat, se) = mc_rate(&batch, &zero).unwrap();
    let closed = 2.0 * gamma * (1.0 - t_c * (1.0 - (-t_total / t_c).exp()) / t_total);
    assert!(se > 0.0);
    let z = (rhat - closed) / se;
    assert!(
        z.abs() <= 3.0,
        "MC unmodulated rate {rhat} +- {se} vs closed form {closed} (z = {z})"
    );
}

#[test]
fn pulse_train_rate_within_three_sigma_of_quadrature() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(10.0, 256).unwrap();
    let batch = sample_noise(&c, grid, 10_000, 42).unwrap();
    let (dd, _) = dd_sequence(20.0, grid, 1.0).unwrap();
    let (rhat, se) = mc_rate(&batch, &dd).unwrap();
    let deterministic = rate_time_domain(&c, &dd);
    let z = (rhat - deterministic) / se;
    assert!(
        z.abs() <= 3.0,
        "MC pulse-train rate {rhat} +- {se} vs quadrature {deterministic} (z = {z})"
    );
}

#[test]
fn batches_are_seed_deterministic_and_seed_sensitive() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(2.0, 32).unwrap();
    let a = sample_noise(&c, grid, 8, 5).unwrap();
    let b = sample_noise(&c, grid, 8, 5).unwrap();
    assert_eq!(a.realizations(), b.realizations());
    let other = sample_noise(&c, grid, 8, 6).unwrap();
    assert_ne!(a.realizations(), other.realizations());
}

#[test]
fn rate_samples_average_to_the_estimate() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = TimeGrid::new(10.0, 64).unwrap();
    let batch = sample_noise(&c, grid, 100, 9).unwrap();
    let zero = ControlField::zero(grid);
    let samples = rate_samples(&batch, &zero).unwrap();
    let (mean, _) = mc_rate(&batch, &zero).unwrap();
    let avg = samples.iter().sum::<f64>() / samples.len() as f64;
    assert!((avg - mean).abs() <= 1e-12 * mean.abs().max(1.0));
}
