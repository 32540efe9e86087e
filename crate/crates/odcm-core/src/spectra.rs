//! Noise correlation functions and dephasing spectra.
//!
//! A stationary noise process enters the rate functional through its second
//! moment `Phi(t) = Phi_env(|t|) * exp(-i*Delta*t)` (envelope plus spectral
//! center) or equivalently through its dephasing spectrum `G(omega)`, the
//! Fourier transform of `Phi`. This module defines both representations,
//! converts between them by trapezoid quadrature, and builds the standard
//! scenario spectra: single Lorentzian peak (resonant and off-resonant),
//! banded 1/f, multi-peak, and the finite-temperature bath spectrum.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::{trapz, FrequencyGrid};
use crate::{Error, Result};

/// Relative floor below which the envelope counts as decayed when choosing
/// the Fourier integration window.
pub const DECAY_FLOOR: f64 = 1e-8;

/// Relative tolerance under which small negative quadrature results are
/// clamped to zero in [`spectrum_from_correlation`].
pub const NEGATIVE_CLAMP_REL: f64 = 1e-6;

/// One weighted Lorentzian carrier of a composite correlation:
/// `(gamma/t_c) * exp(-|t|/t_c) * exp(-i*delta*t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierTerm {
    pub gamma: f64,
    pub t_c: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKind {
    /// `Phi_env(t) = (gamma/t_c) * exp(-t/t_c)`.
    Lorentzian { gamma: f64, t_c: f64 },
    /// Real envelope samples on a uniform lag grid starting at 0.
    Tabulated { lag_spacing: f64, values: Vec<f64> },
    /// Sum of weighted Lorentzian carriers (multi-peak scenario).
    Composite { terms: Vec<CarrierTerm> },
    /// Full complex `Phi(t)` samples for `t >= 0` on a uniform lag grid;
    /// negative lags follow from `Phi(-t) = conj(Phi(t))`.
    TabulatedComplex { lag_spacing: f64, re: Vec<f64>, im: Vec<f64> },
}

/// The noise second moment `Phi(t) = Phi_env(|t|) * exp(-i*Delta*t)`, so a
/// positive `Delta` puts the spectral weight at positive frequencies.
///
/// For `Composite` and `TabulatedComplex` kinds the carrier structure lives
/// inside [`CorrelationFunction::phi`] and `spectral_center` is the centroid
/// of the spectrum, kept for the single-carrier view.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunction {
    kind: CorrelationKind,
    spectral_center: f64,
}

impl CorrelationFunction {
    pub fn new(kind: CorrelationKind, spectral_center: f64) -> Result<Self> {
        match &kind {
            CorrelationKind::Lorentzian { gamma, t_c } => {
                if !(*gamma > 0.0) || !(*t_c > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lorentzian correlation needs gamma > 0 and t_c > 0, got gamma={gamma}, t_c={t_c}"
                    )));
                }
            }
            CorrelationKind::Tabulated { lag_spacing, values } => {
                if !(*lag_spacing > 0.0) || values.len() < 2 {
                    return Err(Error::InvalidInput(
                        "tabulated correlation needs positive spacing and >= 2 samples".into(),
                    ));
                }
                if values[0] < 0.0 {
                    return Err(Error::InvalidInput(
                        "envelope at lag 0 must be non-negative".into(),
                    ));
                }
            }
            CorrelationKind::Composite { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidInput("composite correlation needs terms".into()));
                }
                for t in terms {
                    if !(t.gamma > 0.0) || !(t.t_c > 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "composite term needs gamma > 0 and t_c > 0, got gamma={}, t_c={}",
                            t.gamma, t.t_c
                        )));
                    }
                }
            }
            CorrelationKind::TabulatedComplex { lag_spacing, re, im } => {
                if !(*lag_spacing > 0.0) || re.len() < 2 || re.len() != im.len() {
                    return Err(Error::InvalidInput(
                        "tabulated complex correlation needs positive spacing and matching sample arrays".into(),
                    ));
                }
            }
        }
        Ok(Self { kind, spectral_center })
    }

    pub fn kind(&self) -> &CorrelationKind {
        &self.kind
    }

    pub fn spectral_center(&self) -> f64 {
        self.spectral_center
    }

    /// Envelope `Phi_env(|t|)`; even in the lag.
    pub fn envelope(&self, lag: f64) -> f64 {
        let t = libm::fabs(lag);
        match &self.kind {
            CorrelationKind::Lorentzian { gamma, t_c } => gamma / t_c * libm::exp(-t / t_c),
            CorrelationKind::Tabulated { lag_spacing, values } => {
                interp_uniform(*lag_spacing, values, t)
            }
            CorrelationKind::Composite { .. } | CorrelationKind::TabulatedComplex { .. } => {
                self.phi(t).norm()
            }
        }
    }

    /// Full complex `Phi(t)` including the carrier; Hermitian in the lag.
    pub fn phi(&self, lag: f64) -> Complex64 {
        match &self.kind {
            CorrelationKind::Lorentzian { .. } | CorrelationKind::Tabulated { .. } => {
                let env = self.envelope(lag);
                Complex64::from_polar(env, -self.spectral_center * lag)
            }
            CorrelationKind::Composite { terms } => {
                let t = libm::fabs(lag);
                let mut acc = Complex64::new(0.0, 0.0);
                for term in terms {
                    let env = term.gamma / term.t_c * libm::exp(-t / term.t_c);
                    acc += Complex64::from_polar(env, -term.delta * lag);
                }
                acc
            }
            CorrelationKind::TabulatedComplex { lag_spacing, re, im } => {
                let t = libm::fabs(lag);
                let v = Complex64::new(
                    interp_uniform(*lag_spacing, re, t),
                    interp_uniform(*lag_spacing, im, t),
                );
                if lag < 0.0 {
                    v.conj()
                } else {
                    v
                }
            }
        }
    }

    /// Variance-like scale `Phi_env(0)` used by floors and tolerances.
    pub fn variance_scale(&self) -> f64 {
        self.envelope(0.0)
    }

    /// Lag at which the envelope has decayed below `DECAY_FLOOR` relative to
    /// `Phi_env(0)`, searched on `steps` samples up to `max_lag`. Errors if
    /// the envelope has not decayed by `max_lag`.
    pub fn decay_lag(&self, max_lag: f64, steps: usize) -> Result<f64> {
        let scale = self.variance_scale();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let h = max_lag / steps as f64;
        for i in 1..=steps {
            let t = i as f64 * h;
            if self.envelope(t) < DECAY_FLOOR * scale {
                return Ok(t);
            }
        }
        Err(Error::Truncation(format!(
            "envelope has not decayed below {DECAY_FLOOR:e} * Phi(0) within lag window {max_lag}"
        )))
    }

    /// Closed-form dephasing spectrum, where one exists for this kind.
    pub fn spectrum_closed_form(&self) -> Option<DephasingSpectrum> {
        match &self.kind {
            CorrelationKind::Lorentzian { gamma, t_c } => Some(DephasingSpectrum {
                kind: SpectrumKind::Lorentzian {
                    gamma: *gamma,
                    t_c: *t_c,
                    center: self.spectral_center,
                },
                cutoffs: None,
            }),
            CorrelationKind::Composite { terms } => Some(DephasingSpectrum {
                kind: SpectrumKind::MultiPeak {
                    peaks: terms
                        .iter()
                        .map(|t| Peak { weight: t.gamma, center: t.delta, t_c: t.t_c })
                        .collect(),
                },
                cutoffs: None,
            }),
            _ => None,
        }
    }
}

/// One Lorentzian resonance of a multi-peak spectrum:
/// `(weight/pi) / (1 + (omega - center)^2 * t_c^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub weight: f64,
    pub center: f64,
    pub t_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    Lorentzian { gamma: f64, t_c: f64, center: f64 },
    OneOverF { amplitude: f64, omega_min: f64, omega_max: f64 },
    MultiPeak { peaks: Vec<Peak> },
    Thermal { beta: f64, base: Box<DephasingSpectrum> },
    /// Values on a uniform frequency grid symmetric about 0; zero outside.
    Tabulated { grid: FrequencyGrid, values: Vec<f64> },
}

/// The dephasing spectrum `G(omega) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingSpectrum {
    kind: SpectrumKind,
    /// Optional band `(lo, hi)`: `G` is forced to 0 unless `lo <= |omega| <= hi`.
    cutoffs: Option<(f64, f64)>,
}

impl DephasingSpectrum {
    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn cutoffs(&self) -> Option<(f64, f64)> {
        self.cutoffs
    }

    pub fn tabulated(grid: FrequencyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "tabulated spectrum needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { kind: SpectrumKind::Tabulated { grid, values }, cutoffs: None })
    }

    pub fn value(&self, omega: f64) -> f64 {
        if let Some((lo, hi)) = self.cutoffs {
            let a = libm::fabs(omega);
            if a < lo || a > hi {
                return 0.0;
            }
        }
        match &self.kind {
            SpectrumKind::Lorentzian { gamma, t_c, center } => {
                let d = (omega - center) * t_c;
                gamma / core::f64::consts::PI / (1.0 + d * d)
            }
            SpectrumKind::OneOverF { amplitude, omega_min, omega_max } => {
                let a = libm::fabs(omega);
                if a < *omega_min || a > *omega_max {
                    0.0
                } else {
                    amplitude / a
                }
            }
            SpectrumKind::MultiPeak { peaks } => {
                let mut acc = 0.0;
                for p in peaks {
                    let d = (omega - p.center) * p.t_c;
                    acc += p.weight / core::f64::consts::PI / (1.0 + d * d);
                }
                acc
            }
            SpectrumKind::Thermal { beta, base } => {
                if omega == 0.0 {
                    // base has no support at 0 by construction; avoid the
                    // 1/(e^(beta*omega)-1) pole.
                    return 0.0;
                }
                let mut acc = 0.0;
                let g_pos = base.value(omega);
                if g_pos != 0.0 {
                    acc += (bose_occupation(*beta, omega) + 1.0) * g_pos;
                }
                let g_neg = base.value(-omega);
                if g_neg != 0.0 {
                    acc += bose_occupation(*beta, -omega) * g_neg;
                }
                acc
            }
            SpectrumKind::Tabulated { grid, values } => {
                let lo = grid.omega(0);
                if omega < lo || omega > grid.omega_max() {
                    return 0.0;
                }
                interp_uniform(grid.spacing(), values, omega - lo)
            }
        }
    }

    /// Largest `|omega|` with nonzero support, where it is known; tabulated
    /// spectra report their grid edge.
    pub fn support_hint(&self) -> Option<f64> {
        match &self.kind {
            SpectrumKind::OneOverF { omega_max, .. } => Some(*omega_max),
            SpectrumKind::Tabulated { grid, .. } => Some(grid.omega_max()),
            SpectrumKind::Thermal { base, .. } => base.support_hint(),
            _ => self.cutoffs.map(|(_, hi)| hi),
        }
    }

    /// True when the spectrum is provably zero for all `omega <= 0`
    /// (the precondition for a zero-temperature bath base).
    fn positive_support_only(&self) -> bool {
        if let Some((lo, _)) = self.cutoffs {
            // cutoffs are applied to |omega|, so a band never restricts
            // support to positive frequencies on its own
            let _ = lo;
        }
        match &self.kind {
            SpectrumKind::Tabulated { grid, values } => {
                (0..grid.len()).all(|i| grid.omega(i) > 0.0 || values[i] == 0.0)
            }
            _ => false,
        }
    }
}

fn bose_occupation(beta: f64, omega: f64) -> f64 {
    1.0 / (libm::exp(beta * omega) - 1.0)
}

/// Linear interpolation of uniformly spaced samples starting at coordinate 0;
/// zero beyond the last sample.
fn interp_uniform(spacing: f64, values: &[f64], x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let pos = x / spacing;
    let i = pos as usize;
    if i + 1 >= values.len() {
        if i + 1 == values.len() && pos - i as f64 <= 1e-12 {
            return values[i];
        }
        return 0.0;
    }
    let frac = pos - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// Resonant single-peak noise: `Phi(t) = (gamma/t_c) * exp(-t/t_c)`.
pub fn lorentzian_correlation(gamma: f64, t_c: f64) -> Result<CorrelationFunction> {
    CorrelationFunction::new(CorrelationKind::Lorentzian { gamma, t_c }, 0.0)
}

/// Off-resonant variant: same envelope, spectral center replaced by `delta`.
pub fn shift_center(c: &CorrelationFunction, delta: f64) -> CorrelationFunction {
    CorrelationFunction { kind: c.kind.clone(), spectral_center: delta }
}

/// Multi-carrier correlation matching [`multi_peak_spectrum`]:
/// `Phi(t) = sum_i (gamma_i/t_c_i) exp(-|t|/t_c_i) exp(i*delta_i*t)`.
pub fn composite_correlation(terms: Vec<CarrierTerm>) -> Result<CorrelationFunction> {
    let centroid = if terms.is_empty() {
        0.0
    } else {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in &terms {
            num += t.gamma * t.delta;
            den += t.gamma;
        }
        num / den
    };
    CorrelationFunction::new(CorrelationKind::Composite { terms }, centroid)
}

/// Fourier transform `G(omega) = (2*pi)^-1 integral Phi(t) e^{i*omega*t} dt`,
/// tabulated on `grid`.
///
/// Uses the Hermitian symmetry `Phi(-t) = conj(Phi(t))` so only the lag half
/// axis is integrated: `G = (1/pi) * Re integral_0^W Phi(t) e^{i*omega*t} dt`.
/// The window `W` is where the envelope decays below [`DECAY_FLOOR`], capped
/// at `max_lag`; a non-decayed envelope is a truncation error. Small negative
/// quadrature residue is clamped to zero; significant negativity is an
/// inconsistent-input error.
pub fn spectrum_from_correlation(
    c: &CorrelationFunction,
    grid: &FrequencyGrid,
    max_lag: f64,
    lag_points: usize,
) -> Result<DephasingSpectrum> {
    if lag_points < 16 {
        return Err(Error::InvalidParameter("lag_points must be >= 16".into()));
    }
    if c.variance_scale() == 0.0 {
        return DephasingSpectrum::tabulated(*grid, alloc::vec![0.0; grid.len()]);
    }
    let window = c.decay_lag(max_lag, lag_points)?;
    let window = if window > 0.0 { window } else { max_lag };
    let h = window / (lag_points - 1) as f64;
    let phi: Vec<Complex64> = (0..lag_points).map(|i| c.phi(i as f64 * h)).collect();

    let mut values = Vec::with_capacity(grid.len());
    let inv_pi = 1.0 / core::f64::consts::PI;
    for omega in grid.omegas() {
        // Re integral_0^W Phi(t) e^{i w t} dt, composite trapezoid
        let mut acc = 0.0;
        for (i, p) in phi.iter().enumerate() {
            let t = i as f64 * h;
            let w = crate::grid::trapz_weight(i, lag_points);
            acc += w * (p.re * libm::cos(omega * t) - p.im * libm::sin(omega * t));
        }
        values.push(inv_pi * acc * h);
    }

    let gmax = values.iter().cloned().fold(0.0_f64, f64::max);
    let clamp = NEGATIVE_CLAMP_REL * gmax.max(f64::MIN_POSITIVE);
    for v in &mut values {
        if *v < 0.0 {
            if -*v <= clamp {
                *v = 0.0;
            } else {
                return Err(Error::InconsistentInput(format!(
                    "spectrum value {v} more negative than quadrature clamp {clamp:e}"
                )));
            }
        }
    }
    DephasingSpectrum::tabulated(*grid, values)
}

/// Inverse transform `Phi(t) = integral G(omega) e^{-i*omega*t} domega`,
/// tabulated on a uniform lag grid of `lag_points` samples over `[0, max_lag]`.
///
/// Returns the full complex correlation with envelope `|Phi(t)|` and the
/// spectral centroid as its single-carrier center.
pub fn correlation_from_spectrum(
    s: &DephasingSpectrum,
    quad_grid: &FrequencyGrid,
    max_lag: f64,
    lag_points: usize,
) -> Result<CorrelationFunction> {
    if lag_points < 2 || !(max_lag > 0.0) {
        return Err(Error::InvalidParameter(
            "correlation_from_spectrum needs lag_points >= 2 and max_lag > 0".into(),
        ));
    }
    let g: Vec<f64> = quad_grid.omegas().map(|w| s.value(w)).collect();
    let dw = quad_grid.spacing();
    let total = trapz(&g, dw);
    if total <= 0.0 {
        return Err(Error::InvalidInput("spectrum has empty support on the grid".into()));
    }
    let first_moment: f64 = {
        let gw: Vec<f64> = quad_grid.omegas().zip(g.iter()).map(|(w, v)| w * v).collect();
        trapz(&gw, dw)
    };
    let centroid = first_moment / total;

    let h = max_lag / (lag_points - 1) as f64;
    let n = quad_grid.len();
    let mut re = Vec::with_capacity(lag_points);
    let mut im = Vec::with_capacity(lag_points);
    for i in 0..lag_points {
        let t = i as f64 * h;
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for (j, gv) in g.iter().enumerate() {
            if *gv == 0.0 {
                continue;
            }
            let w = quad_grid.omega(j);
            let wt = crate::grid::trapz_weight(j, n);
            acc_re += wt * gv * libm::cos(w * t);
            acc_im -= wt * gv * libm::sin(w * t);
        }
        re.push(acc_re * dw);
        im.push(acc_im * dw);
    }
    CorrelationFunction::new(CorrelationKind::TabulatedComplex { lag_spacing: h, re, im }, centroid)
}

/// Finite-temperature dephasing spectrum
/// `G(omega) = (n(omega)+1) G0(omega) + n(-omega) G0(-omega)`
/// with `n(omega) = 1/(e^{beta*omega} - 1)`.
///
/// `g0` must be a zero-temperature bath spectrum supported on `omega > 0`
/// only; the `omega = 0` point evaluates to 0.
pub fn thermal_spectrum(g0: DephasingSpectrum, beta: f64) -> Result<DephasingSpectrum> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !g0.positive_support_only() {
        return Err(Error::InvalidInput(
            "zero-temperature base spectrum must vanish for omega <= 0; \
             provide it tabulated with zeros at non-positive frequencies"
                .into(),
        ));
    }
    Ok(DephasingSpectrum {
        kind: SpectrumKind::Thermal { beta, base: Box::new(g0) },
        cutoffs: None,
    })
}

/// Banded 1/f spectrum: `G(omega) = A/|omega|` for
/// `omega_min <= |omega| <= omega_max`, zero outside (symmetric convention).
pub fn one_over_f_spectrum(
    amplitude: f64,
    omega_min: f64,
    omega_max: f64,
) -> Result<DephasingSpectrum> {
    if !(amplitude > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "1/f amplitude must be positive, got {amplitude}"
        )));
    }
    if !(omega_min > 0.0) || !(omega_min < omega_max) {
        return Err(Error::InvalidParameter(format!(
            "1/f cutoffs need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    Ok(DephasingSpectrum {
        kind: SpectrumKind::OneOverF { amplitude, omega_min, omega_max },
        cutoffs: Some((omega_min, omega_max)),
    })
}

/// Multi-peak spectrum `G(omega) = sum_i (gamma_i/pi) / (1 + (omega-delta_i)^2 t_c_i^2)`.
pub fn multi_peak_spectrum(peaks: Vec<Peak>) -> Result<DephasingSpectrum> {
    if peaks.is_empty() {
        return Err(Error::InvalidInput("multi-peak spectrum needs at least one peak".into()));
    }
    for p in &peaks {
        if !(p.weight > 0.0) || !(p.t_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "peak needs weight > 0 and t_c > 0, got weight={}, t_c={}",
                p.weight, p.t_c
            )));
        }
    }
    Ok(DephasingSpectrum { kind: SpectrumKind::MultiPeak { peaks }, cutoffs: None })
}

/// Closed-form single-Lorentzian spectrum, the Fourier pair of
/// [`lorentzian_correlation`] shifted to `center`.
pub fn lorentzian_spectrum(gamma: f64, t_c: f64, center: f64) -> Result<DephasingSpectrum> {
    if !(gamma > 0.0) || !(t_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lorentzian spectrum needs gamma > 0 and t_c > 0, got gamma={gamma}, t_c={t_c}"
        )));
    }
    Ok(DephasingSpectrum { kind: SpectrumKind::Lorentzian { gamma, t_c, center }, cutoffs: None })
}
