//! Fourier-pair oracles for the spectrum/correlation conversions.

use odcm_core::spectra::*;
use odcm_core::FrequencyGrid;

const PI: f64 = std::f64::consts::PI;

/// Closed-form transform of the two-sided exponential envelope.
fn lorentzian_g(gamma: f64, t_c: f64, omega: f64) -> f64 {
    gamma / PI / (1.0 + omega * omega * t_c * t_c)
}

#[test]
fn lorentzian_transform_matches_closed_form() {
    let c = lorentzian_correlation(1.0, 1.0).unwrap();
    let grid = FrequencyGrid::new(10.0, 256).unwrap();
    let s = spectrum_from_correlation(&c, &grid, 60.0, 8192).unwrap();
    for w in grid.omegas() {
        let expect = lorentzian_g(1.0, 1.0, w);
        assert!(
            (s.value(w) - expect).abs() < 1e-6,
            "G({w}) = {} vs closed form {expect}",
            s.value(w)
        );
    }
    assert!((s.value(0.0) - 1.0 / PI).abs() < 1e-6);
}

#[test]
fn gaussian_pair() {
    // envelope e^{-t^2} tabulated; transform is e^{-omega^2/4} / (2 sqrt(pi))
    let spacing = 6.0 / 4095.0;
    let values: Vec<f64> = (0..4096)
        .map(|i| {
            let t = i as f64 * spacing;
            (-t * t).exp()
        })
        .collect();
    let c = CorrelationFunction::new(
        CorrelationKind::Tabulated { lag_spacing: spacing, values },
        0.0,
    )
    .unwrap();
    let grid = FrequencyGrid::new(8.0, 128).unwrap();
    let s = spectrum_from_correlation(&c, &grid, 6.0, 4096).unwrap();
    for w in grid.omegas() {
        let expect = (-w * w / 4.0).exp() / (2.0 * PI.sqrt());
        assert!(
            (s.value(w) - expect).abs() < 1e-6,
            "G({w}) = {} vs Gaussian pair {expect}",
            s.value(w)
        );
    }
}

#[test]
fn shifted_center_moves_the_peak() {
    let c = shift_center(&lorentzian_correlation(1.0, 1.0).unwrap(), 5.0);
    let grid = FrequencyGrid::new(15.0, 600).unwrap();
    let s = spectrum_from_correlation(&c, &grid, 60.0, 8192).unwrap();
    let (argmax, _) = grid
        .omegas()
        .enumerate()
        .max_by(|a, b| s.value(a.1).partial_cmp(&s.value(b.1)).unwrap())
        .unwrap();
    assert!((grid.omega(argmax) - 5.0).abs() <= grid.spacing());
}

#[test]
fn inverse_transform_recovers_lorentzian_envelope() {
    let s = lorentzian_spectrum(1.0, 1.0, 0.0).unwrap();
    let quad = FrequencyGrid::new(400.0, 131072).unwrap();
    let c = correlation_from_spectrum(&s, &quad, 8.0, 512).unwrap();
    assert!(c.spectral_center().abs() < 1e-9, "even spectrum must have zero centroid");
    for i in 0..512 {
        let t = i as f64 * 8.0 / 511.0;
        let expect = (-t).exp();
        assert!(
            (c.envelope(t) - expect).abs() < 2e-3,
            "envelope({t}) = {} vs {expect}",
            c.envelope(t)
        );
    }
}

#[test]
fn narrow_peak_acts_like_a_carrier() {
    // one grid-point-wide peak at omega0: Phi ~ const envelope, center omega0
    let omega0 = 3.0;
    let grid = FrequencyGrid::new(6.0, 600).unwrap();
    let values: Vec<f64> = grid
        .omegas()
        .map(|w| if (w - omega0).abs() < grid.spacing() * 0.5 { 1.0 } else { 0.0 })
        .collect();
    let s = DephasingSpectrum::tabulated(grid, values).unwrap();
    let c = correlation_from_spectrum(&s, &grid, 2.0, 128).unwrap();
    assert!((c.spectral_center() - omega0).abs() < 1e-6);
    let e0 = c.envelope(0.0);
    for i in 0..128 {
        let t = i as f64 * 2.0 / 127.0;
        assert!((c.envelope(t) - e0).abs() < 1e-3 * e0);
    }
}

#[test]
fn fourier_round_trip() {
    let s = lorentzian_spectrum(1.0, 1.0, 0.0).unwrap();
    let quad = FrequencyGrid::new(400.0, 131072).unwrap();
    let c = correlation_from_spectrum(&s, &quad, 40.0, 4096).unwrap();
    let grid = FrequencyGrid::new(10.0, 128).unwrap();
    let back = spectrum_from_correlation(&c, &grid, 40.0, 4096).unwrap();
    for w in grid.omegas() {
        let expect = s.value(w);
        assert!(
            (back.value(w) - expect).abs() < 1e-5,
            "round trip at {w}: {} vs {expect}",
            back.value(w)
        );
    }
}

#[test]
fn multi_peak_cross_route() {
    let peaks = vec![
        Peak { weight: 1.0, center: 0.0, t_c: 1.0 },
        Peak { weight: 0.5, center: 3.0, t_c: 2.0 },
    ];
    let s = multi_peak_spectrum(peaks).unwrap();
    let c = composite_correlation(vec![
        CarrierTerm { gamma: 1.0, t_c: 1.0, delta: 0.0 },
        CarrierTerm { gamma: 0.5, t_c: 2.0, delta: 3.0 },
    ])
    .unwrap();
    let grid = FrequencyGrid::new(12.0, 512).unwrap();
    let via_phi = spectrum_from_correlation(&c, &grid, 80.0, 16384).unwrap();
    for w in grid.omegas() {
        assert!(
            (via_phi.value(w) - s.value(w)).abs() < 1e-6,
            "G({w}): {} vs analytic {}",
            via_phi.value(w),
            s.value(w)
        );
    }
}

#[test]
fn detailed_balance_everywhere() {
    let grid = FrequencyGrid::new(5.0, 512).unwrap();
    let values: Vec<f64> = grid
        .omegas()
        .map(|w| if w > 0.0 { (-(w - 2.0) * (w - 2.0)).exp() } else { 0.0 })
        .collect();
    let g0 = DephasingSpectrum::tabulated(grid, values).unwrap();
    let beta = 0.7;
    let g = thermal_spectrum(g0, beta).unwrap();
    for i in 0..grid.len() {
        let w = grid.omega(i);
        if w <= 0.0 {
            continue;
        }
        let pos = g.value(w);
        if pos == 0.0 {
            continue;
        }
        let ratio = g.value(-w) / pos;
        let expect = (-beta * w).exp();
        assert!(
            (ratio - expect).abs() <= 1e-12 * expect,
            "detailed balance at {w}: {ratio} vs {expect}"
        );
    }
}

#[test]
fn spectra_are_non_negative() {
    let c = shift_center(&lorentzian_correlation(1.0, 2.0).unwrap(), 1.5);
    let grid = FrequencyGrid::new(10.0, 512).unwrap();
    let s = spectrum_from_correlation(&c, &grid, 80.0, 8192).unwrap();
    for w in grid.omegas() {
        assert!(s.value(w) >= 0.0);
    }
}
