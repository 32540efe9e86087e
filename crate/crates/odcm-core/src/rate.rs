//! The average modified dephasing rate, in both domains.
//!
//! Time domain: `R(T) = (2/T) Re integral_0^T dt integral_0^t dt1
//! Phi(t-t1) eps*(t) eps(t1)`, which reduces to the cosine form
//! `(2/T) int int Phi_env(t-t1) cos[phi(t)-phi(t1)+Delta(t-t1)]` for a
//! single carrier. Frequency domain: `R(T) = 2*pi integral G(omega)
//! F_T(omega) domega`. Both are trapezoid sums; the pair is the main
//! cross-check of the whole crate.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::control::{finite_time_ft, spectral_intensity, ControlField};
use crate::grid::{trapz, trapz_weight, FrequencyGrid};
use crate::spectra::{CorrelationFunction, DephasingSpectrum};
use crate::{Error, Result};

/// Relative floor (times `Phi_env(0) * T`) below which an unmodulated rate
/// is considered degenerate for normalization purposes.
pub const RATE_FLOOR_REL: f64 = 1e-12;

/// Rate evaluation via the triangular double integral over `[0, T]`.
///
/// Nested composite trapezoid with the inner upper limit snapped to grid
/// points; fixed summation order, so results are bit-reproducible.
pub fn rate_time_domain(c: &CorrelationFunction, field: &ControlField) -> f64 {
    let grid = field.grid();
    let n = grid.len();
    let h = grid.spacing();
    let t_total = grid.duration();
    let eps = field.epsilon();

    // correlation on the lag grid; Phi(-s) = conj(Phi(s))
    let phi_lag: Vec<Complex64> = (0..n).map(|m| c.phi(m as f64 * h)).collect();

    let mut outer = 0.0;
    for i in 1..n {
        // inner integral over t1 in [0, t_i]
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..=i {
            let w = trapz_weight(j, i + 1);
            inner += phi_lag[i - j] * eps[j] * w;
        }
        let w_outer = trapz_weight(i, n);
        outer += w_outer * (eps[i].conj() * inner).re;
    }
    2.0 / t_total * outer * h * h
}

/// Rate via the spectral overlap `2*pi integral G(omega) F_T(omega) domega`.
///
/// Errors if the spectrum declares support beyond the frequency grid.
pub fn rate_freq_domain(
    s: &DephasingSpectrum,
    f_t: &[f64],
    freq: &FrequencyGrid,
) -> Result<f64> {
    if f_t.len() != freq.len() {
        return Err(Error::InvalidInput(format!(
            "F_T has {} samples, frequency grid expects {}",
            f_t.len(),
            freq.len()
        )));
    }
    if let Some(support) = s.support_hint() {
        if support > freq.omega_max() * (1.0 + 1e-12) {
            return Err(Error::Coverage(format!(
                "spectrum support extends to |omega| = {support}, grid only covers {}",
                freq.omega_max()
            )));
        }
    }
    let integrand: Vec<f64> =
        freq.omegas().zip(f_t.iter()).map(|(w, f)| s.value(w) * f).collect();
    Ok(2.0 * core::f64::consts::PI * trapz(&integrand, freq.spacing()))
}

/// Perturbative fidelity `F = 1 - alpha * R * T`, clamped to `[0, 1]`.
/// The flag reports when the raw value left the interval (the linear
/// formula is out of its validity range there).
pub fn fidelity(rate: f64, t_total: f64, alpha: f64) -> Result<(f64, bool)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be in (0, 1], got {alpha}"
        )));
    }
    if !(rate >= 0.0) || !(t_total >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fidelity needs rate >= 0 and T >= 0, got rate={rate}, T={t_total}"
        )));
    }
    let raw = 1.0 - alpha * rate * t_total;
    if raw < 0.0 {
        Ok((0.0, true))
    } else if raw > 1.0 {
        Ok((1.0, true))
    } else {
        Ok((raw, false))
    }
}

/// Rate of `field` divided by the rate of the zero (unmodulated) field on
/// the same grid.
pub fn normalized_rate(c: &CorrelationFunction, field: &ControlField) -> Result<f64> {
    let grid = field.grid();
    let unmod = rate_time_domain(c, &ControlField::zero(grid));
    let floor = RATE_FLOOR_REL * c.variance_scale() * grid.duration();
    if unmod <= floor {
        return Err(Error::DegenerateNormalization(format!(
            "unmodulated rate {unmod} is below the floor {floor:e}"
        )));
    }
    Ok(rate_time_domain(c, field) / unmod)
}

/// Both evaluation routes plus derived quantities, for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub r_time: f64,
    pub r_freq: f64,
    pub t_total: f64,
    pub energy_used: f64,
    pub alpha: f64,
    pub fidelity: f64,
    pub fidelity_clamped: bool,
    pub normalized: Option<f64>,
}

impl RateReport {
    /// Relative disagreement between the two routes.
    pub fn route_discrepancy(&self, rate_floor: f64) -> f64 {
        libm::fabs(self.r_time - self.r_freq) / libm::fabs(self.r_time).max(rate_floor)
    }
}

/// Evaluates a field against a correlation/spectrum pair on both routes.
pub fn rate_report(
    c: &CorrelationFunction,
    s: &DephasingSpectrum,
    field: &ControlField,
    freq: &FrequencyGrid,
    alpha: f64,
    normalized: Option<f64>,
) -> Result<RateReport> {
    let grid = field.grid();
    let r_time = rate_time_domain(c, field);
    let eps_ft = finite_time_ft(&field.epsilon(), &grid, freq)?;
    let f_t = spectral_intensity(&eps_ft, grid.duration())?;
    let r_freq = rate_freq_domain(s, &f_t, freq)?;
    let (fid, clamped) = fidelity(r_time.max(0.0), grid.duration(), alpha)?;
    Ok(RateReport {
        r_time,
        r_freq,
        t_total: grid.duration(),
        energy_used: field.energy(),
        alpha,
        fidelity: fid,
        fidelity_clamped: clamped,
        normalized,
    })
}
