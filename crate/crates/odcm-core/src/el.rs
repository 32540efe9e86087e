//! Nonlinear energy-constrained Euler-Lagrange solver.
//!
//! The stationarity condition for the energy-constrained rate minimum is
//!
//! ```text
//! phidd(t) = -sqrt(E) * Z[t, phi] / sqrt(integral_0^T |integral_0^t1 Z|^2 dt1)
//! Z[t, phi] = (1/T) integral_0^T Phi_env(|t-t1|) sin[phi(t)-phi(t1)+Delta(t-t1)] dt1
//! ```
//!
//! solved here by damped Picard iteration: evaluate the right-hand side at
//! the current phase, integrate twice with `phi(0) = phid(0) = 0`, blend with
//! the previous iterate, repeat. The update rule has the useful algebraic
//! property that every undamped iterate spends exactly the budgeted energy
//! (up to rounding), because `phid = -sqrt(E) I / D` with `D^2 = integral |I|^2`.

use alloc::format;
use alloc::vec::Vec;

use crate::control::ControlField;
use crate::grid::{cumtrapz, trapz, trapz_weight, TimeGrid};
use crate::rate::rate_time_domain;
use crate::spectra::CorrelationFunction;
use crate::{Error, Result};

/// Relative scale of the default denominator floor:
/// `denom_floor = DENOM_FLOOR_REL * Phi_env(0) * T^2`.
pub const DENOM_FLOOR_REL: f64 = 1e-12;

/// Relative scale of the default residual tolerance:
/// `residual_tol = RESIDUAL_TOL_REL * sqrt(E) * Phi_env(0) * T`.
pub const RESIDUAL_TOL_REL: f64 = 1e-4;

/// Smallest damping factor the automatic halving may reach.
pub const MIN_DAMPING: f64 = 1.0 / 64.0;

/// Initial iterate for [`solve_optimal`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Chirp-like ansatz; `a = None` scales the coefficient so the guess
    /// spends the budgeted energy.
    Chirp { a: Option<f64> },
    /// Energy-matched pulse train of the given pulse width.
    Dd { nu_pulse: f64 },
    /// Constant amplitude `Omega = slope` (linearly growing phase).
    LinearPhase { slope: f64 },
    /// Caller-provided amplitude samples.
    Explicit(Vec<f64>),
}

/// Numerical knobs of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: TimeGrid,
    /// Damping `theta` in `(0, 1]`: `phi_{k+1} = (1-theta) phi_k + theta phi*`.
    pub damping: f64,
    /// Convergence threshold on `max |phi_{k+1} - phi_k|` (radians).
    pub tol_phase: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
    /// Override for the denominator floor; `None` derives
    /// `DENOM_FLOOR_REL * Phi_env(0) * T^2`.
    pub denom_floor: Option<f64>,
}

impl SolverConfig {
    pub fn new(grid: TimeGrid, initial_guess: InitialGuess) -> Self {
        Self {
            grid,
            damping: 0.5,
            tol_phase: 1e-9,
            max_iter: 400,
            initial_guess,
            denom_floor: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must be in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol_phase > 0.0) {
            return Err(Error::InvalidParameter("tol_phase must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        if let Some(f) = self.denom_floor {
            if !(f > 0.0) {
                return Err(Error::InvalidParameter("denom_floor must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Output of [`solve_optimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElSolution {
    pub field: ControlField,
    pub iterations: usize,
    /// Max-norm Euler-Lagrange residual of the returned field.
    pub residual: f64,
    pub energy_realized: f64,
    pub converged: bool,
    /// Rate of the returned field (the minimized objective).
    pub objective: f64,
    /// True when the sign-flipped initial guess produced the kept branch.
    pub negated_guess: bool,
}

/// The averaged kernel functional
/// `Z(t_i) = (1/T) integral_0^T Im[Phi(t_i - t1) e^{i(phi(t_i)-phi(t1))}] dt1`,
/// which reduces to the `Phi_env * sin(...)` form for a single carrier.
///
/// The inner loop is free of transcendentals: the correlation is tabulated
/// on the lag grid and the phase differences are expanded through
/// precomputed `sin(phi_i)`, `cos(phi_i)`.
pub fn z_functional(c: &CorrelationFunction, phase: &[f64], grid: &TimeGrid) -> Vec<f64> {
    let n = grid.len();
    debug_assert_eq!(phase.len(), n);
    let h = grid.spacing();
    let t_total = grid.duration();

    let mut kc = Vec::with_capacity(n);
    let mut ks = Vec::with_capacity(n);
    for m in 0..n {
        let p = c.phi(m as f64 * h);
        kc.push(p.re);
        ks.push(p.im);
    }
    let has_carrier = ks.iter().any(|v| *v != 0.0);

    let sin_p: Vec<f64> = phase.iter().map(|p| libm::sin(*p)).collect();
    let cos_p: Vec<f64> = phase.iter().map(|p| libm::cos(*p)).collect();
    let wc: Vec<f64> = (0..n).map(|j| trapz_weight(j, n) * cos_p[j]).collect();
    let ws: Vec<f64> = (0..n).map(|j| trapz_weight(j, n) * sin_p[j]).collect();

    let scale = h / t_total;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Im[(kc + i*sgn*ks)(cos(dphi) + i*sin(dphi))]
        //   = kc*sin(dphi) + sgn*ks*cos(dphi),  dphi = phi_i - phi_j,
        // expanded via sin/cos of the individual phases.
        let (mut sum_cc, mut sum_cs) = (0.0, 0.0);
        for j in 0..n {
            let m = if i >= j { i - j } else { j - i };
            let k = kc[m];
            sum_cc += k * wc[j];
            sum_cs += k * ws[j];
        }
        let mut z = sin_p[i] * sum_cc - cos_p[i] * sum_cs;
        if has_carrier {
            let (mut sum_sc, mut sum_ss) = (0.0, 0.0);
            for j in 0..i {
                let k = ks[i - j];
                sum_sc += k * wc[j];
                sum_ss += k * ws[j];
            }
            for j in (i + 1)..n {
                let k = ks[j - i];
                sum_sc -= k * wc[j];
                sum_ss -= k * ws[j];
            }
            z += cos_p[i] * sum_sc + sin_p[i] * sum_ss;
        }
        out.push(z * scale);
    }
    out
}

fn denom_floor_for(c: &CorrelationFunction, grid: &TimeGrid, cfg_floor: Option<f64>) -> f64 {
    cfg_floor.unwrap_or_else(|| {
        let t = grid.duration();
        DENOM_FLOOR_REL * c.variance_scale() * t * t
    })
}

/// Default residual tolerance for a converged solution.
pub fn residual_tolerance(c: &CorrelationFunction, energy: f64, grid: &TimeGrid) -> f64 {
    RESIDUAL_TOL_REL * libm::sqrt(energy) * c.variance_scale() * grid.duration()
}

fn build_initial(
    guess: &InitialGuess,
    grid: TimeGrid,
    energy: f64,
) -> Result<ControlField> {
    match guess {
        InitialGuess::Chirp { a } => {
            let coeff = match a {
                Some(v) => *v,
                None => {
                    let unit = crate::control::chirp_ansatz(1.0, grid)?;
                    let e1 = unit.energy();
                    libm::sqrt(energy / e1)
                }
            };
            crate::control::chirp_ansatz(coeff, grid)
        }
        InitialGuess::Dd { nu_pulse } => {
            let (field, _) = crate::control::dd_sequence(energy, grid, *nu_pulse)?;
            Ok(field)
        }
        InitialGuess::LinearPhase { slope } => {
            ControlField::from_amplitude(grid, alloc::vec![*slope; grid.len()])
        }
        InitialGuess::Explicit(samples) => {
            ControlField::from_amplitude(grid, samples.clone())
        }
    }
}

struct IterationOutcome {
    field: ControlField,
    iterations: usize,
    converged: bool,
}

fn picard(
    c: &CorrelationFunction,
    energy: f64,
    cfg: &SolverConfig,
    initial: &ControlField,
    floor: f64,
) -> Result<IterationOutcome> {
    let grid = cfg.grid;
    let h = grid.spacing();
    let sqrt_e = libm::sqrt(energy);

    let mut phase = initial.phase().to_vec();
    let mut theta = cfg.damping;
    let mut prev_update_sign = 0.0_f64;
    let mut last_amplitude: Option<Vec<f64>> = None;
    let mut converged = false;
    let mut iterations = 0;

    for k in 0..cfg.max_iter {
        iterations = k + 1;
        let z = z_functional(c, &phase, &grid);
        let integral_z = cumtrapz(&z, h);
        let sq: Vec<f64> = integral_z.iter().map(|v| v * v).collect();
        let denom = libm::sqrt(trapz(&sq, h));
        if denom < floor {
            return Err(Error::DegenerateStationaryPoint(format!(
                "EL denominator {denom:e} below floor {floor:e} at iteration {k}; the current \
                 phase (e.g. phi = 0 on resonance) is a critical point of the rate functional \
                 and a different initial guess is required"
            )));
        }
        // undamped update: phid* = -sqrt(E) I / D, phi* = cumtrapz(phid*)
        let amplitude_star: Vec<f64> =
            integral_z.iter().map(|v| -sqrt_e * v / denom).collect();
        let phase_star = cumtrapz(&amplitude_star, h);

        let mut max_update = 0.0_f64;
        let mut signed_at_max = 0.0_f64;
        for (a, b) in phase_star.iter().zip(phase.iter()) {
            let d = a - b;
            if libm::fabs(d) > max_update {
                max_update = libm::fabs(d);
                signed_at_max = d;
            }
        }

        last_amplitude = Some(amplitude_star);
        if max_update < cfg.tol_phase {
            converged = true;
            break;
        }

        // halve the damping when the dominant update alternates sign
        if signed_at_max * prev_update_sign < 0.0 && theta > MIN_DAMPING {
            theta = (theta * 0.5).max(MIN_DAMPING);
        }
        prev_update_sign = signed_at_max;

        for (p, s) in phase.iter_mut().zip(phase_star.iter()) {
            *p = (1.0 - theta) * *p + theta * s;
        }
    }

    // Return the last undamped iterate: it satisfies the energy identity
    // exactly and is within tol_phase of the damped average at convergence.
    let amplitude = last_amplitude.expect("max_iter >= 1");
    let field = ControlField::from_amplitude(grid, amplitude)?;
    Ok(IterationOutcome { field, iterations, converged })
}

/// Solves the energy-constrained Euler-Lagrange equation by damped Picard
/// iteration from the configured initial guess.
///
/// If the converged branch increases the rate relative to the initial guess,
/// the solver retries once with the sign-flipped guess and keeps the branch
/// with the lower rate (`negated_guess` reports the choice).
pub fn solve_optimal(
    c: &CorrelationFunction,
    energy: f64,
    cfg: &SolverConfig,
) -> Result<ElSolution> {
    if !(energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive, got {energy}")));
    }
    cfg.validate()?;
    let grid = cfg.grid;
    let floor = denom_floor_for(c, &grid, cfg.denom_floor);

    let initial = build_initial(&cfg.initial_guess, grid, energy)?;
    let r_initial = rate_time_domain(c, &initial);

    let primary = picard(c, energy, cfg, &initial, floor)?;
    let r_primary = rate_time_domain(c, &primary.field);

    let (outcome, objective, negated) = if r_primary > r_initial {
        let negated_guess = ControlField::from_amplitude(
            grid,
            initial.amplitude().iter().map(|a| -a).collect(),
        )?;
        match picard(c, energy, cfg, &negated_guess, floor) {
            Ok(alt) => {
                let r_alt = rate_time_domain(c, &alt.field);
                if r_alt < r_primary {
                    (alt, r_alt, true)
                } else {
                    (primary, r_primary, false)
                }
            }
            Err(_) => (primary, r_primary, false),
        }
    } else {
        (primary, r_primary, false)
    };

    let residual = el_residual_with_floor(c, &outcome.field, energy, floor)?;
    Ok(ElSolution {
        energy_realized: outcome.field.energy(),
        field: outcome.field,
        iterations: outcome.iterations,
        residual,
        converged: outcome.converged,
        objective,
        negated_guess: negated,
    })
}

/// Max-norm residual `max_i |phidd(t_i) + sqrt(E) Z(t_i)/D|` over interior
/// grid points, with `phidd` from second differences of the phase samples
/// and `D` computed from the field's own `Z`.
pub fn el_residual(
    c: &CorrelationFunction,
    field: &ControlField,
    energy: f64,
) -> Result<f64> {
    let grid = field.grid();
    let floor = denom_floor_for(c, &grid, None);
    el_residual_with_floor(c, field, energy, floor)
}

fn el_residual_with_floor(
    c: &CorrelationFunction,
    field: &ControlField,
    energy: f64,
    floor: f64,
) -> Result<f64> {
    let grid = field.grid();
    let h = grid.spacing();
    let phase = field.phase();
    let z = z_functional(c, phase, &grid);
    let integral_z = cumtrapz(&z, h);
    let sq: Vec<f64> = integral_z.iter().map(|v| v * v).collect();
    let denom = libm::sqrt(trapz(&sq, h));
    if denom < floor {
        return Err(Error::DegenerateStationaryPoint(format!(
            "EL denominator {denom:e} below floor {floor:e}"
        )));
    }
    let sqrt_e = libm::sqrt(energy);
    let mut max_res = 0.0_f64;
    for i in 1..grid.len() - 1 {
        let phidd = (phase[i + 1] - 2.0 * phase[i] + phase[i - 1]) / (h * h);
        let res = libm::fabs(phidd + sqrt_e * z[i] / denom);
        if res > max_res {
            max_res = res;
        }
    }
    Ok(max_res)
}
