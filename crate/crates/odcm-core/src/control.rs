//! Control fields: accumulated phase, amplitude, finite-time spectra,
//! energy, dynamical-decoupling trains, and scenario ansatz fields.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};

use crate::grid::{cumtrapz, trapz, trapz_weight, FrequencyGrid, TimeGrid};
use crate::{Error, Result};

/// A modulation on `[0, T]`: amplitude samples `Omega(t_i)` and the
/// accumulated phase `phi(t_i)`, kept consistent by construction
/// (`phi` is the cumulative trapezoid integral of `Omega`, `phi(0) = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    grid: TimeGrid,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

/// Realized parameters of a periodic pulse train: `n` pulses of width
/// `nu_pulse` at interval `tau`, with `T = n*tau + nu_pulse`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdParams {
    pub n: usize,
    pub nu_pulse: f64,
    pub tau: f64,
}

impl ControlField {
    /// Builds a field from amplitude samples; the phase is the cumulative
    /// trapezoid integral (`phi(0) = 0`).
    pub fn from_amplitude(grid: TimeGrid, amplitude: Vec<f64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "amplitude has {} samples, grid expects {}",
                amplitude.len(),
                grid.len()
            )));
        }
        let phase = cumtrapz(&amplitude, grid.spacing());
        Ok(Self { grid, amplitude, phase })
    }

    /// The zero (unmodulated) field.
    pub fn zero(grid: TimeGrid) -> Self {
        Self {
            grid,
            amplitude: alloc::vec![0.0; grid.len()],
            phase: alloc::vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Phase factor `eps(t_i) = exp(-i*phi(t_i))`; unit modulus by construction.
    pub fn epsilon(&self) -> Vec<Complex64> {
        self.phase.iter().map(|&p| Complex64::from_polar(1.0, -p)).collect()
    }

    /// Invested energy `integral_0^T |Omega|^2 dt` by trapezoid quadrature.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.amplitude.iter().map(|a| a * a).collect();
        trapz(&sq, self.grid.spacing())
    }
}

/// Alias for [`ControlField::from_amplitude`], named for the phase relation
/// `phi(t) = integral_0^t Omega`.
pub fn phase_from_amplitude(grid: TimeGrid, amplitude: Vec<f64>) -> Result<ControlField> {
    ControlField::from_amplitude(grid, amplitude)
}

/// Finite-time Fourier transform
/// `eps_T(omega) = (2*pi)^{-1/2} integral_0^T eps(t) e^{i*omega*t} dt`,
/// evaluated by direct trapezoid quadrature at each requested frequency.
pub fn finite_time_ft(
    epsilon: &[Complex64],
    grid: &TimeGrid,
    freq: &FrequencyGrid,
) -> Result<Vec<Complex64>> {
    if epsilon.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "epsilon has {} samples, grid expects {}",
            epsilon.len(),
            grid.len()
        )));
    }
    let h = grid.spacing();
    let n = grid.len();
    let norm = h / libm::sqrt(2.0 * core::f64::consts::PI);
    let mut out = Vec::with_capacity(freq.len());
    for omega in freq.omegas() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, e) in epsilon.iter().enumerate() {
            let t = i as f64 * h;
            let w = trapz_weight(i, n);
            let rot = Complex64::from_polar(w, omega * t);
            acc += e * rot;
        }
        out.push(acc * norm);
    }
    Ok(out)
}

/// Normalized spectral modulation intensity `F_T(omega) = |eps_T(omega)|^2 / T`.
pub fn spectral_intensity(eps_ft: &[Complex64], t_total: f64) -> Result<Vec<f64>> {
    if !(t_total > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_total}")));
    }
    Ok(eps_ft.iter().map(|e| e.norm_sqr() / t_total).collect())
}

/// Minimum number of grid samples per pulse width for [`dd_sequence`].
pub const DD_MIN_SAMPLES_PER_PULSE: f64 = 8.0;

/// Periodic dynamical-decoupling pulse train with the requested energy
/// budget: `Omega = pi/nu_pulse` on `[j*tau, j*tau + nu_pulse)` for
/// `j = 0..n-1`, zero elsewhere.
///
/// The pulse count is `n = round(nu_pulse * energy / pi^2)` and the interval
/// `tau = (T - nu_pulse)/n`; pulse edges are snapped to grid samples. The
/// realized energy `n*pi^2/nu_pulse` generally differs from the request;
/// callers should compare against the returned [`DdParams`].
pub fn dd_sequence(
    energy: f64,
    grid: TimeGrid,
    nu_pulse: f64,
) -> Result<(ControlField, DdParams)> {
    if !(energy > 0.0) || !(nu_pulse > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dd_sequence needs energy > 0 and nu_pulse > 0, got {energy}, {nu_pulse}"
        )));
    }
    let t_total = grid.duration();
    let h = grid.spacing();
    if h > nu_pulse / DD_MIN_SAMPLES_PER_PULSE {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {h} too coarse for pulse width {nu_pulse}; need h <= nu_pulse/{DD_MIN_SAMPLES_PER_PULSE}"
        )));
    }
    let pi = core::f64::consts::PI;
    let n = libm::round(nu_pulse * energy / (pi * pi)) as i64;
    if n < 1 {
        return Err(Error::EnergyTooSmall(format!(
            "energy {energy} with pulse width {nu_pulse} rounds to zero pi-pulses"
        )));
    }
    let n = n as usize;
    let tau = (t_total - nu_pulse) / n as f64;
    if tau <= nu_pulse {
        return Err(Error::InfeasibleParameters(format!(
            "pulses overlap: interval tau={tau} <= pulse width {nu_pulse} (n={n}, T={t_total})"
        )));
    }

    let height = pi / nu_pulse;
    let mut amplitude = alloc::vec![0.0; grid.len()];
    for j in 0..n {
        let start = j as f64 * tau;
        // snap edges to the nearest samples
        let i0 = libm::round(start / h) as usize;
        let i1 = libm::round((start + nu_pulse) / h) as usize;
        for a in amplitude.iter_mut().take(i1.min(grid.len())).skip(i0) {
            *a = height;
        }
    }
    let field = ControlField::from_amplitude(grid, amplitude)?;
    Ok((field, DdParams { n, nu_pulse, tau }))
}

/// Chirp-like ansatz `Omega(t) = a * (1 + e^{-t/T} (t/T - 1))`, the shape
/// that approximates the optimal modulation for monotonically decreasing
/// spectra.
pub fn chirp_ansatz(a: f64, grid: TimeGrid) -> Result<ControlField> {
    let t_total = grid.duration();
    let amplitude: Vec<f64> = grid
        .times()
        .map(|t| {
            let x = t / t_total;
            a * (1.0 + libm::exp(-x) * (x - 1.0))
        })
        .collect();
    ControlField::from_amplitude(grid, amplitude)
}

/// Multiplicative white perturbation `Omega'(t_i) = Omega(t_i) * (1 + xi_i)`
/// with `xi_i` i.i.d. zero-mean Gaussian of standard deviation `sigma_rel`;
/// deterministic for a given seed. The phase is recomputed.
pub fn perturb(field: &ControlField, sigma_rel: f64, seed: u64) -> Result<ControlField> {
    if !(sigma_rel >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_rel must be >= 0, got {sigma_rel}"
        )));
    }
    if sigma_rel == 0.0 {
        return Ok(field.clone());
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let amplitude: Vec<f64> = field
        .amplitude()
        .iter()
        .map(|a| a * (1.0 + sigma_rel * standard_normal(&mut rng)))
        .collect();
    ControlField::from_amplitude(field.grid(), amplitude)
}

/// One standard normal variate by the Box-Muller transform.
pub(crate) fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    // uniform in (0, 1]: never 0, so the log is finite
    let u1 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let u1 = if u1 == 0.0 { 1.0 / (1u64 << 53) as f64 } else { u1 };
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn grid(t: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t, n).unwrap()
    }

    #[test]
    fn constant_amplitude_gives_linear_phase() {
        let g = grid(2.0, 33);
        let f = phase_from_amplitude(g, vec![3.0; 33]).unwrap();
        for (i, p) in f.phase().iter().enumerate() {
            assert!((p - 3.0 * g.time(i)).abs() < 1e-12);
        }
        assert!((f.energy() - 9.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_amplitude_quadrature() {
        let g = grid(1.0, 2048);
        let amp: Vec<f64> = g.times().map(|t| 2.0 * t).collect();
        let f = ControlField::from_amplitude(g, amp).unwrap();
        assert!((f.phase()[2047] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn epsilon_unit_modulus() {
        let g = grid(1.0, 64);
        let f = ControlField::from_amplitude(g, (0..64).map(|i| (i as f64).sin()).collect())
            .unwrap();
        for e in f.epsilon() {
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }
        let zero = ControlField::zero(g);
        for e in zero.epsilon() {
            assert_eq!(e, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn finite_time_ft_constant_epsilon() {
        let g = grid(2.0, 1024);
        let eps = vec![Complex64::new(1.0, 0.0); 1024];
        // spacing pi: omega = 0 sits at index 8, omega = 2*pi/T at index 9
        let freq = FrequencyGrid::new(8.0 * PI, 8).unwrap();
        let ft = finite_time_ft(&eps, &g, &freq).unwrap();
        let expect0 = 2.0 / (2.0 * PI).sqrt();
        assert!((ft[8].re - expect0).abs() < 1e-10);
        assert!(ft[8].im.abs() < 1e-12);
        // at omega = 2*pi/T the integral vanishes
        assert!(ft[9].norm() < 1e-5);
        let f_t = spectral_intensity(&ft, 2.0).unwrap();
        assert!((f_t[8] - 2.0 / (2.0 * PI)).abs() < 1e-9);
        assert!(f_t.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn finite_time_ft_peaks_at_carrier() {
        let g = grid(10.0, 1024);
        let omega0 = 2.0;
        let eps: Vec<Complex64> =
            g.times().map(|t| Complex64::from_polar(1.0, -omega0 * t)).collect();
        let freq = FrequencyGrid::new(6.0, 300).unwrap();
        let ft = finite_time_ft(&eps, &g, &freq).unwrap();
        let (argmax, _) = ft
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert!((freq.omega(argmax) - omega0).abs() <= freq.spacing());
    }

    #[test]
    fn dd_pulse_count_from_energy() {
        let g = grid(1.0, 161);
        let e = 4.0 * PI * PI / 0.1;
        let (field, params) = dd_sequence(e, g, 0.1).unwrap();
        assert_eq!(params.n, 4);
        assert!((params.tau - 0.225).abs() < 1e-12);
        // phase quantization: phi(T) = n*pi within the edge-quadrature bound
        // (each snapped pulse edge contributes at most h*Omega/2)
        let edge = g.spacing() * PI / 0.1;
        assert!((field.phase()[160] - 4.0 * PI).abs() <= 4.0 * edge);
    }

    #[test]
    fn dd_single_pulse() {
        let g = grid(1.0, 161);
        let e = PI * PI / 0.1;
        let (field, params) = dd_sequence(e, g, 0.1).unwrap();
        assert_eq!(params.n, 1);
        assert!((field.amplitude()[0] - 10.0 * PI).abs() < 1e-12);
        assert_eq!(field.amplitude()[80], 0.0);
        assert!((field.energy() - e).abs() <= 2.0 * g.spacing() * (PI / 0.1) * (PI / 0.1));
    }

    #[test]
    fn dd_error_paths() {
        let g = grid(1.0, 161);
        // too little energy for one pulse
        assert!(matches!(dd_sequence(1.0, g, 0.1), Err(Error::EnergyTooSmall(_))));
        // so many pulses they overlap
        assert!(matches!(
            dd_sequence(4000.0, g, 0.1),
            Err(Error::InfeasibleParameters(_))
        ));
        // grid too coarse for the pulse width
        let coarse = grid(1.0, 16);
        assert!(dd_sequence(PI * PI / 0.1, coarse, 0.1).is_err());
    }

    #[test]
    fn chirp_ansatz_shape() {
        let g = grid(5.0, 256);
        let f = chirp_ansatz(2.0, g).unwrap();
        assert_eq!(f.amplitude()[0], 0.0);
        assert!((f.amplitude()[255] - 2.0).abs() < 1e-12);
        for w in f.amplitude().windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn perturb_contract() {
        let g = grid(5.0, 2048);
        let f = ControlField::from_amplitude(g, vec![1.0; 2048]).unwrap();
        let same = perturb(&f, 0.0, 7).unwrap();
        assert_eq!(f, same);
        let a = perturb(&f, 0.1, 7).unwrap();
        let b = perturb(&f, 0.1, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, perturb(&f, 0.1, 8).unwrap());
        // sample mean of xi within the central-limit bound
        let mean: f64 =
            a.amplitude().iter().map(|v| v - 1.0).sum::<f64>() / 2048.0;
        assert!(mean.abs() < 5.0 * 0.1 / (2048.0_f64).sqrt());
    }
}
