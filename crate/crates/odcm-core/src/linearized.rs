//! Linearized Euler-Lagrange equation around a base modulation.
//!
//! For a deviation `nu(t)` from a base phase `phi0(t)` the first-order
//! stationarity condition is the linear integro-differential equation
//!
//! ```text
//! lambda*nudd(t) + <Q(t,t1)(nu(t) - nu(t1))>_T = -C(t)
//! Q(t,t1) = Phi_env(|t-t1|) cos(phi0(t) - phi0(t1) + Delta(t-t1))
//! C(t)    = lambda*phi0dd(t) + Z[t, phi0]
//! ```
//!
//! discretized as a dense linear system on the time grid, with the
//! Lagrange multiplier eliminated by an outer scalar root-find over the
//! energy constraint. The positivity constraint of the off-resonant
//! scenario is applied by clip-and-rescale.

use alloc::format;
use alloc::vec::Vec;

use crate::control::ControlField;
use crate::el::z_functional;
use crate::grid::{trapz_weight, TimeGrid};
use crate::linalg::lu_solve;
use crate::spectra::CorrelationFunction;
use crate::{Error, Result};

/// Deviation magnitude above which the first-order expansion is suspect.
pub const VALIDITY_LIMIT: f64 = 0.3;

/// Relative energy tolerance of the lambda root-find.
pub const ENERGY_TOL_REL: f64 = 1e-6;

/// Optimal first-order phase deviation around a base modulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub nu: Vec<f64>,
    /// Lagrange multiplier the deviation was solved with.
    pub lambda: f64,
    /// Set when `max |nu| > VALIDITY_LIMIT` (the expansion assumed `nu << 1`).
    pub validity_warning: bool,
}

/// Kernel value `Q(t, t1) = Re[Phi(t - t1) e^{i(phi0(t) - phi0(t1))}]`,
/// the cosine form for a single carrier. Even under `t <-> t1`.
pub fn kernel_q(c: &CorrelationFunction, phi0_t: f64, phi0_t1: f64, t: f64, t1: f64) -> f64 {
    let p = c.phi(t - t1);
    let dphi = phi0_t - phi0_t1;
    p.re * libm::cos(dphi) - p.im * libm::sin(dphi)
}

/// Second differences of phase samples; second-order one-sided at the ends.
fn second_difference(phase: &[f64], h: f64) -> Vec<f64> {
    let n = phase.len();
    let h2 = h * h;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i == 0 {
            (2.0 * phase[0] - 5.0 * phase[1] + 4.0 * phase[2] - phase[3]) / h2
        } else if i + 1 == n {
            (2.0 * phase[n - 1] - 5.0 * phase[n - 2] + 4.0 * phase[n - 3] - phase[n - 4]) / h2
        } else {
            (phase[i + 1] - 2.0 * phase[i] + phase[i - 1]) / h2
        };
        out.push(v);
    }
    out
}

/// Source term `C(t_i) = lambda * phi0dd(t_i) + Z[t_i, phi0]`.
pub fn source_c(
    c: &CorrelationFunction,
    phi0: &[f64],
    lambda: f64,
    grid: &TimeGrid,
) -> Vec<f64> {
    let z = z_functional(c, phi0, grid);
    let phidd = second_difference(phi0, grid.spacing());
    phidd.iter().zip(z.iter()).map(|(p, zv)| lambda * p + zv).collect()
}

/// Solves the discretized linearized EL equation for the deviation at a
/// fixed Lagrange multiplier.
///
/// Boundary rows impose `nu(0) = nu(t_1) = 0` (the discrete form of
/// `nu(0) = nud(0) = 0`); the remaining rows collocate
/// `lambda*D2 nu + qbar*nu - (kernel matrix) nu = -C` at the interior
/// points `t_1 .. t_{n-2}`. Both conditions sit at the left end, so the
/// equation is not collocated at the final point; placing it there would
/// need a one-sided stencil whose difference part is a linear combination
/// of the neighboring central rows and the system would be near-singular.
pub fn solve_linearized(
    c: &CorrelationFunction,
    phi0: &[f64],
    lambda: f64,
    grid: &TimeGrid,
) -> Result<Deviation> {
    let n = grid.len();
    if phi0.len() != n {
        return Err(Error::InvalidInput(format!(
            "phi0 has {} samples, grid expects {}",
            phi0.len(),
            n
        )));
    }
    if lambda == 0.0 {
        return Err(Error::InvalidParameter(
            "lambda must be nonzero: the discretized operator needs the nudd term".into(),
        ));
    }
    let h = grid.spacing();
    let t_total = grid.duration();
    let rhs_c = source_c(c, phi0, lambda, grid);

    let mut a = alloc::vec![0.0; n * n];
    let mut b = alloc::vec![0.0; n];

    // boundary rows: nu(0) = 0, nu(t_1) = 0
    a[0] = 1.0;
    a[n + 1] = 1.0;

    let h2 = h * h;
    for i in 1..n - 1 {
        // matrix row i+1 collocates the equation at t_i
        let row = &mut a[(i + 1) * n..(i + 2) * n];
        row[i - 1] += lambda / h2;
        row[i] += -2.0 * lambda / h2;
        row[i + 1] += lambda / h2;
        // kernel terms: qbar(t_i)*nu_i - (h w_j / T) Q_ij nu_j
        let t_i = grid.time(i);
        let mut qbar = 0.0;
        for j in 0..n {
            let t_j = grid.time(j);
            let q = kernel_q(c, phi0[i], phi0[j], t_i, t_j);
            let w = trapz_weight(j, n) * h / t_total;
            qbar += w * q;
            row[j] -= w * q;
        }
        row[i] += qbar;
        b[i + 1] = -rhs_c[i];
    }

    lu_solve(&mut a, n, &mut b)?;
    let max_nu = b.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
    Ok(Deviation { nu: b, lambda, validity_warning: max_nu > VALIDITY_LIMIT })
}

/// Amplitude of the corrected field `phi0 + nu`: base amplitude plus the
/// central-difference derivative of the deviation.
fn corrected_field(base: &ControlField, nu: &[f64]) -> Result<ControlField> {
    let grid = base.grid();
    let h = grid.spacing();
    let n = grid.len();
    let mut amplitude = Vec::with_capacity(n);
    for i in 0..n {
        let dnu = if i == 0 {
            (-3.0 * nu[0] + 4.0 * nu[1] - nu[2]) / (2.0 * h)
        } else if i + 1 == n {
            (3.0 * nu[n - 1] - 4.0 * nu[n - 2] + nu[n - 3]) / (2.0 * h)
        } else {
            (nu[i + 1] - nu[i - 1]) / (2.0 * h)
        };
        amplitude.push(base.amplitude()[i] + dnu);
    }
    ControlField::from_amplitude(grid, amplitude)
}

/// Eliminates the Lagrange multiplier through the energy constraint:
/// finds `lambda` such that the corrected field `phi0 + nu(lambda)` spends
/// exactly `energy`, by a log-spaced bracket scan and bisection.
///
/// The scan is centered on the base field's own multiplier estimate
/// `lambda_hat = -<phi0dd, Z> / <phi0dd, phi0dd>` (falling back to
/// `lambda0 = Phi_env(0) * T^2` when that is degenerate) and steps
/// outward so the bracket nearest the base point wins. A scan spanning
/// six decades each way without a sign change returns a bracket-failure
/// error carrying the `(lambda, energy)` table.
pub fn solve_with_energy(
    c: &CorrelationFunction,
    base: &ControlField,
    energy: f64,
) -> Result<(ControlField, Deviation)> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive, got {energy}")));
    }
    let grid = base.grid();
    let t_total = grid.duration();
    let lambda0 = c.variance_scale() * t_total * t_total;
    let center = {
        let z = z_functional(c, base.phase(), &grid);
        let phidd = second_difference(base.phase(), grid.spacing());
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 2..grid.len() - 1 {
            num -= phidd[i] * z[i];
            den += phidd[i] * phidd[i];
        }
        let hat = num / den;
        if hat.is_finite() && hat > 0.0 {
            hat
        } else {
            lambda0
        }
    };

    let eval = |lambda: f64| -> Result<(ControlField, Deviation, f64)> {
        let dev = solve_linearized(c, base.phase(), lambda, &grid)?;
        let field = corrected_field(base, &dev.nu)?;
        let mismatch = field.energy() - energy;
        Ok((field, dev, mismatch))
    };

    // step outward from the center, 4 points per decade, 6 decades each way;
    // track the last mismatch seen on each side so the nearest bracket wins
    let tol = ENERGY_TOL_REL * energy;
    let mut scan: Vec<(f64, f64)> = Vec::new();
    let mut bracket: Option<((f64, f64), (f64, f64))> = None;
    let mut last_up: Option<(f64, f64)> = None;
    let mut last_down: Option<(f64, f64)> = None;
    'scan: for k in 0..=24i32 {
        let signs: &[f64] = if k == 0 { &[0.0] } else { &[1.0, -1.0] };
        for sign in signs {
            let lambda = center * libm::pow(10.0, 0.25 * k as f64 * sign);
            let (field, dev, mismatch) = match eval(lambda) {
                Ok(out) => out,
                Err(Error::IllPosed { .. }) => continue,
                Err(e) => return Err(e),
            };
            if libm::fabs(mismatch) <= tol {
                return Ok((field, dev));
            }
            scan.push((lambda, mismatch + energy));
            let prev = if *sign >= 0.0 { &mut last_up } else { &mut last_down };
            if let Some((pl, pm)) = *prev {
                if pm * mismatch <= 0.0 {
                    bracket = Some(((pl, pm), (lambda, mismatch)));
                    break 'scan;
                }
            }
            *prev = Some((lambda, mismatch));
            if k == 0 {
                last_down = last_up;
            }
        }
    }

    let ((mut lo, mut f_lo), (mut hi, _)) = bracket.ok_or_else(|| Error::BracketFailure {
        detail: format!(
            "no sign change in corrected-field energy over lambda in [1e-6, 1e6] * {center:e} \
             for target energy {energy}"
        ),
        scan: scan.clone(),
    })?;

    // bisection in log(lambda)
    let mut best: Option<(ControlField, Deviation, f64)> = None;
    for _ in 0..80 {
        let mid = libm::sqrt(lo * hi);
        let (field, dev, mismatch) = eval(mid)?;
        let abs_m = libm::fabs(mismatch);
        if best.as_ref().map_or(true, |(_, _, bm)| abs_m < libm::fabs(*bm)) {
            best = Some((field, dev, mismatch));
        }
        if abs_m <= tol {
            break;
        }
        if f_lo * mismatch <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = mismatch;
        }
    }
    let (field, dev, mismatch) = best.expect("bisection ran at least once");
    if libm::fabs(mismatch) > tol {
        return Err(Error::BracketFailure {
            detail: format!(
                "bisection stalled: residual energy mismatch {mismatch:e} exceeds tolerance {tol:e}"
            ),
            scan,
        });
    }
    Ok((field, dev))
}

/// Enforces `Omega(t) >= 0` by clipping, then rescales by a single positive
/// factor so the energy equals `energy`. Idempotent on non-negative fields
/// that already spend `energy`.
pub fn apply_positivity(field: &ControlField, energy: f64) -> Result<ControlField> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive, got {energy}")));
    }
    let clipped: Vec<f64> = field.amplitude().iter().map(|a| a.max(0.0)).collect();
    let tmp = ControlField::from_amplitude(field.grid(), clipped)?;
    let e_clipped = tmp.energy();
    if e_clipped <= 0.0 {
        return Err(Error::DegenerateField(
            "amplitude is non-positive everywhere; nothing remains after clipping".into(),
        ));
    }
    let scale = libm::sqrt(energy / e_clipped);
    let rescaled: Vec<f64> = tmp.amplitude().iter().map(|a| a * scale).collect();
    ControlField::from_amplitude(field.grid(), rescaled)
}
