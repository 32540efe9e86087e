//! Scenario orchestration: energy sweeps with DD comparison and optional
//! linear refinement, robustness studies, and Monte-Carlo validation.

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use odcm_core::control::{dd_sequence, perturb, ControlField};
use odcm_core::el::{solve_optimal, ElSolution, InitialGuess, SolverConfig};
use odcm_core::linearized::{apply_positivity, solve_with_energy};
use odcm_core::mc::{mc_rate, sample_noise};
use odcm_core::rate::{rate_report, rate_time_domain, RateReport};
use odcm_core::spectra::{
    composite_correlation, correlation_from_spectrum, lorentzian_correlation,
    lorentzian_spectrum, multi_peak_spectrum, one_over_f_spectrum, shift_center, CarrierTerm,
    CorrelationFunction, CorrelationKind, DephasingSpectrum, Peak,
};
use odcm_core::{FrequencyGrid, TimeGrid};

use crate::config::{McSection, RobustnessSection, Scenario, SpectrumConfig};

/// Everything derived once per scenario and shared across sweep points.
pub struct ScenarioContext {
    pub scenario: Scenario,
    pub correlation: CorrelationFunction,
    pub spectrum: DephasingSpectrum,
    pub grid: TimeGrid,
    pub freq: FrequencyGrid,
    /// Normalization baseline: rate of the zero field.
    pub r_unmod: f64,
}

impl ScenarioContext {
    pub fn build(scenario: Scenario) -> Result<Self> {
        let grid = TimeGrid::new(scenario.t_total, scenario.grid_points)
            .map_err(|e| anyhow!("time grid: {e}"))?;
        let freq = FrequencyGrid::new(
            scenario.frequency.omega_max,
            scenario.frequency.half_points,
        )
        .map_err(|e| anyhow!("frequency grid: {e}"))?;

        let (correlation, spectrum) = match &scenario.spectrum {
            SpectrumConfig::Lorentzian { gamma, t_c, delta } => {
                let c = shift_center(
                    &lorentzian_correlation(*gamma, *t_c).map_err(|e| anyhow!("{e}"))?,
                    *delta,
                );
                let s = lorentzian_spectrum(*gamma, *t_c, *delta).map_err(|e| anyhow!("{e}"))?;
                (c, s)
            }
            SpectrumConfig::OneOverF { amplitude, omega_min, omega_max } => {
                let s = one_over_f_spectrum(*amplitude, *omega_min, *omega_max)
                    .map_err(|e| anyhow!("{e}"))?;
                // inverse-transform the spectrum on the report frequency grid:
                // the two rate routes then discretize the same data, so their
                // agreement is limited only by the time quadrature
                let c = correlation_from_spectrum(
                    &s,
                    &freq,
                    scenario.t_total,
                    scenario.grid_points.max(512),
                )
                .map_err(|e| anyhow!("inverse transform of 1/f spectrum: {e}"))?;
                (c, s)
            }
            SpectrumConfig::MultiPeak { peaks } => {
                let terms: Vec<CarrierTerm> = peaks
                    .iter()
                    .map(|p| CarrierTerm { gamma: p.weight, t_c: p.t_c, delta: p.center })
                    .collect();
                let c = composite_correlation(terms).map_err(|e| anyhow!("{e}"))?;
                let s = multi_peak_spectrum(
                    peaks
                        .iter()
                        .map(|p| Peak { weight: p.weight, center: p.center, t_c: p.t_c })
                        .collect(),
                )
                .map_err(|e| anyhow!("{e}"))?;
                (c, s)
            }
        };

        if let Some(support) = spectrum.support_hint() {
            if support > freq.omega_max() {
                bail!(
                    "frequency.omega_max = {} does not cover the spectrum support |omega| <= {support}",
                    freq.omega_max()
                );
            }
        }

        let r_unmod = rate_time_domain(&correlation, &ControlField::zero(grid));
        Ok(Self { scenario, correlation, spectrum, grid, freq, r_unmod })
    }

    fn solver_config(&self, guess: InitialGuess) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.grid, guess);
        cfg.damping = self.scenario.solver.damping;
        cfg.tol_phase = self.scenario.solver.tol_phase;
        cfg.max_iter = self.scenario.solver.max_iter;
        cfg
    }
}

/// Solved fields of one sweep point, kept for CSV/plot emission.
pub struct PointFields {
    pub optimal: ControlField,
    pub dd: Option<ControlField>,
}

/// One row of the sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub e_requested: f64,
    /// DD's realized energy when a pulse train exists, else the budget.
    pub e_realized: f64,
    pub r_opt: f64,
    pub r_opt_freq: f64,
    pub r_dd: Option<f64>,
    pub r_dd_refined: Option<f64>,
    pub r_unmod: f64,
    pub normalized_opt: f64,
    pub normalized_dd: Option<f64>,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub fidelity: f64,
    /// Non-fatal notes (e.g. the linear refinement failing to bracket).
    pub notes: Vec<String>,
}

pub struct SweepPoint {
    pub report: PointReport,
    pub fields: PointFields,
}

/// Energy-matched pulse train in the orientation that dephases less; off
/// resonance the ramp direction relative to the spectral center matters.
fn best_dd(
    c: &CorrelationFunction,
    grid: TimeGrid,
    energy: f64,
    nu_pulse: f64,
) -> odcm_core::Result<(ControlField, f64)> {
    let (up, _) = dd_sequence(energy, grid, nu_pulse)?;
    let down = ControlField::from_amplitude(
        grid,
        up.amplitude().iter().map(|a| -a).collect(),
    )?;
    let r_up = rate_time_domain(c, &up);
    let r_down = rate_time_domain(c, &down);
    if r_down < r_up {
        Ok((down, r_down))
    } else {
        Ok((up, r_up))
    }
}

/// Positivity projection with the sign freedom resolved: clips whichever of
/// the field and its negation keeps the lower rate after rescaling. An
/// unconstrained optimum that runs to negative amplitudes (detuned spectra)
/// would otherwise be clipped to nothing.
fn positive_projection(
    c: &CorrelationFunction,
    field: &ControlField,
    energy: f64,
) -> Result<ControlField> {
    let negated = ControlField::from_amplitude(
        field.grid(),
        field.amplitude().iter().map(|a| -a).collect(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let mut best: Option<(f64, ControlField)> = None;
    for candidate in [field, &negated] {
        if let Ok(projected) = apply_positivity(candidate, energy) {
            let r = rate_time_domain(c, &projected);
            if best.as_ref().map_or(true, |(rb, _)| r < *rb) {
                best = Some((r, projected));
            }
        }
    }
    best.map(|(_, f)| f)
        .ok_or_else(|| anyhow!("positivity projection left no usable amplitude"))
}

/// Runs one sweep point: optimal solve, DD comparison, optional refinement.
pub fn run_point(ctx: &ScenarioContext, energy: f64) -> Result<SweepPoint> {
    let scenario = &ctx.scenario;

    // the rate functional has several stationary points (a detuned spectrum
    // favors one ramp direction over the other), so solve from a handful of
    // initial guesses and keep the best converged branch
    let slope = (energy / ctx.grid.duration()).sqrt();
    let mut guesses = vec![
        InitialGuess::Chirp { a: None },
        InitialGuess::LinearPhase { slope },
        InitialGuess::LinearPhase { slope: -slope },
    ];
    if let Some(dd_cfg) = &scenario.dd {
        guesses.push(InitialGuess::Dd { nu_pulse: dd_cfg.nu_pulse });
    }
    let mut sol: Option<ElSolution> = None;
    let mut solve_errors = Vec::new();
    for guess in guesses {
        match solve_optimal(&ctx.correlation, energy, &ctx.solver_config(guess)) {
            Ok(s) => {
                let better = sol.as_ref().map_or(true, |b| {
                    (s.converged && !b.converged)
                        || (s.converged == b.converged && s.objective < b.objective)
                });
                if better {
                    sol = Some(s);
                }
            }
            Err(e) => solve_errors.push(e.to_string()),
        }
    }
    let sol = sol.ok_or_else(|| {
        anyhow!("EL solve at E = {energy}: every initial guess failed: {}", solve_errors.join("; "))
    })?;
    let mut notes = Vec::new();

    let optimal = if scenario.positivity {
        let projected = positive_projection(&ctx.correlation, &sol.field, energy)
            .map_err(|e| anyhow!("positivity projection at E = {energy}: {e}"))?;
        if rate_time_domain(&ctx.correlation, &projected) > sol.objective {
            notes.push("positivity projection raised the rate".into());
        }
        projected
    } else {
        sol.field.clone()
    };

    let opt_report: RateReport = rate_report(
        &ctx.correlation,
        &ctx.spectrum,
        &optimal,
        &ctx.freq,
        scenario.alpha,
        None,
    )
    .map_err(|e| anyhow!("rate evaluation at E = {energy}: {e}"))?;

    let mut e_realized = energy;
    let mut r_dd = None;
    let mut r_dd_refined = None;
    let mut dd_field = None;
    if let Some(dd_cfg) = &scenario.dd {
        // under the positivity constraint the mirrored (negative) train is
        // not admissible, so the reference is the plain positive train
        let dd_result = if scenario.positivity {
            dd_sequence(energy, ctx.grid, dd_cfg.nu_pulse)
                .map(|(dd, _)| {
                    let r = rate_time_domain(&ctx.correlation, &dd);
                    (dd, r)
                })
        } else {
            best_dd(&ctx.correlation, ctx.grid, energy, dd_cfg.nu_pulse)
        };
        match dd_result {
            Ok((dd, rate)) => {
                e_realized = dd.energy();
                r_dd = Some(rate);
                if scenario.linearized_from_dd {
                    match solve_with_energy(&ctx.correlation, &dd, e_realized) {
                        Ok((refined, dev)) => {
                            let refined = if scenario.positivity {
                                positive_projection(&ctx.correlation, &refined, e_realized)
                                    .map_err(|e| anyhow!("positivity on refined field: {e}"))?
                            } else {
                                refined
                            };
                            if dev.validity_warning {
                                notes.push(
                                    "linear refinement outside the small-deviation regime".into(),
                                );
                            }
                            r_dd_refined =
                                Some(rate_time_domain(&ctx.correlation, &refined));
                        }
                        Err(e) => notes.push(format!("linear refinement failed: {e}")),
                    }
                }
                dd_field = Some(dd);
            }
            Err(e) => notes.push(format!("dd sequence at E = {energy}: {e}")),
        }
    }

    let report = PointReport {
        e_requested: energy,
        e_realized,
        r_opt: opt_report.r_time,
        r_opt_freq: opt_report.r_freq,
        r_dd,
        r_dd_refined,
        r_unmod: ctx.r_unmod,
        normalized_opt: opt_report.r_time / ctx.r_unmod,
        normalized_dd: r_dd.map(|r| r / ctx.r_unmod),
        converged: sol.converged,
        residual: sol.residual,
        iterations: sol.iterations,
        fidelity: opt_report.fidelity,
        notes,
    };
    Ok(SweepPoint { report, fields: PointFields { optimal, dd: dd_field } })
}

pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    /// Per-energy failures, `(E, message)`.
    pub failures: Vec<(f64, String)>,
}

/// Runs all sweep points in parallel; the result is ordered by energy and a
/// failed point never disturbs the others.
pub fn run_sweep(ctx: &ScenarioContext) -> SweepOutcome {
    let mut results: Vec<(f64, Result<SweepPoint>)> = ctx
        .scenario
        .energies
        .par_iter()
        .map(|e| (*e, run_point(ctx, *e)))
        .collect();
    results.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (e, res) in results {
        match res {
            Ok(p) => points.push(p),
            Err(err) => failures.push((e, format!("{err:#}"))),
        }
    }
    SweepOutcome { points, failures }
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessRow {
    pub seed: u64,
    pub r_perturbed: f64,
    pub relative_increase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub e_requested: f64,
    pub sigma_rel: f64,
    pub r_base: f64,
    pub median_relative_increase: f64,
    pub max_relative_increase: f64,
    pub rows: Vec<RobustnessRow>,
}

/// Perturbs the field once per seed and reports the relative rate increase
/// against the unperturbed rate.
pub fn robustness_study(
    ctx: &ScenarioContext,
    section: &RobustnessSection,
    energy: f64,
    field: &ControlField,
    base_seed: u64,
) -> Result<RobustnessReport> {
    let r_base = rate_time_domain(&ctx.correlation, field);
    let mut rows: Vec<RobustnessRow> = (base_seed..base_seed + section.seeds)
        .into_par_iter()
        .map(|seed| -> Result<RobustnessRow> {
            let perturbed = perturb(field, section.sigma_rel, seed)
                .map_err(|e| anyhow!("perturbation with seed {seed}: {e}"))?;
            let r = rate_time_domain(&ctx.correlation, &perturbed);
            Ok(RobustnessRow {
                seed,
                r_perturbed: r,
                relative_increase: (r - r_base) / r_base,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.seed);
    let mut sorted: Vec<f64> = rows.iter().map(|r| r.relative_increase).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let max = *sorted.last().unwrap();
    Ok(RobustnessReport {
        e_requested: energy,
        sigma_rel: section.sigma_rel,
        r_base,
        median_relative_increase: median,
        max_relative_increase: max,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct McRow {
    pub field: String,
    pub energy: f64,
    pub r_mc: f64,
    pub stderr: f64,
    pub r_quadrature: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McValidation {
    pub realizations: usize,
    pub seed: u64,
    pub grid_points: usize,
    /// True when the spectrum is off-center and the sampler draws from the
    /// envelope kernel only.
    pub envelope_only: bool,
    pub rows: Vec<McRow>,
}

/// Resamples an amplitude profile onto a (usually coarser) grid.
fn resample(field: &ControlField, target: TimeGrid) -> Result<ControlField> {
    let src = field.grid();
    let amp: Vec<f64> = target
        .times()
        .map(|t| {
            let x = t / src.spacing();
            let i = (x.floor() as usize).min(src.len() - 2);
            let frac = x - i as f64;
            field.amplitude()[i] * (1.0 - frac) + field.amplitude()[i + 1] * frac
        })
        .collect();
    ControlField::from_amplitude(target, amp).map_err(|e| anyhow!("resample: {e}"))
}

/// Monte-Carlo validation of the rate quadrature for the zero field, the
/// pulse train, and the solved optimum.
pub fn validate_mc(
    ctx: &ScenarioContext,
    mc: &McSection,
    energy: f64,
    optimal: &ControlField,
) -> Result<McValidation> {
    let grid = TimeGrid::new(ctx.scenario.t_total, mc.grid_points)
        .map_err(|e| anyhow!("mc grid: {e}"))?;
    let envelope_only = ctx.correlation.spectral_center() != 0.0
        || !matches!(
            ctx.correlation.kind(),
            CorrelationKind::Lorentzian { .. } | CorrelationKind::Tabulated { .. }
        );
    // the sampler draws real noise with the envelope covariance; compare
    // against the quadrature under the same kernel
    let reference = if envelope_only {
        let h = grid.spacing();
        let values: Vec<f64> =
            (0..grid.len()).map(|i| ctx.correlation.envelope(i as f64 * h)).collect();
        CorrelationFunction::new(
            CorrelationKind::Tabulated { lag_spacing: h, values },
            0.0,
        )
        .map_err(|e| anyhow!("envelope tabulation: {e}"))?
    } else {
        ctx.correlation.clone()
    };

    let batch = sample_noise(&reference, grid, mc.realizations, mc.seed)
        .map_err(|e| anyhow!("noise sampling: {e}"))?;

    let mut fields: Vec<(String, ControlField)> =
        vec![("zero".into(), ControlField::zero(grid))];
    if let Some(dd_cfg) = &ctx.scenario.dd {
        let (dd, _) = dd_sequence(energy, grid, dd_cfg.nu_pulse)
            .map_err(|e| anyhow!("dd sequence on mc grid: {e}"))?;
        fields.push(("dd".into(), dd));
    }
    fields.push(("optimal".into(), resample(optimal, grid)?));

    let rows = fields
        .into_iter()
        .map(|(name, field)| -> Result<McRow> {
            let (r_mc, stderr) =
                mc_rate(&batch, &field).map_err(|e| anyhow!("mc rate for {name}: {e}"))?;
            let r_q = rate_time_domain(&reference, &field);
            let z = if stderr > 0.0 { (r_mc - r_q) / stderr } else { 0.0 };
            Ok(McRow {
                field: name,
                energy: field.energy(),
                r_mc,
                stderr,
                r_quadrature: r_q,
                z_score: z,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McValidation {
        realizations: mc.realizations,
        seed: mc.seed,
        grid_points: mc.grid_points,
        envelope_only,
        rows,
    })
}

/// Overlay data for one energy: the dephasing spectrum and the modulation
/// intensities of the optimal and DD fields on the report grid.
pub struct Overlay {
    pub omegas: Vec<f64>,
    pub g: Vec<f64>,
    pub f_opt: Vec<f64>,
    pub f_dd: Option<Vec<f64>>,
}

pub fn build_overlay(ctx: &ScenarioContext, point: &SweepPoint) -> Result<Overlay> {
    use odcm_core::control::{finite_time_ft, spectral_intensity};
    let intensity = |field: &ControlField| -> Result<Vec<f64>> {
        let ft = finite_time_ft(&field.epsilon(), &ctx.grid, &ctx.freq)
            .map_err(|e| anyhow!("finite-time transform: {e}"))?;
        spectral_intensity(&ft, ctx.grid.duration()).map_err(|e| anyhow!("intensity: {e}"))
    };
    let omegas: Vec<f64> = ctx.freq.omegas().collect();
    let g: Vec<f64> = ctx.freq.omegas().map(|w| ctx.spectrum.value(w)).collect();
    let f_opt = intensity(&point.fields.optimal)?;
    let f_dd = match &point.fields.dd {
        Some(dd) => Some(intensity(dd)?),
        None => None,
    };
    Ok(Overlay { omegas, g, f_opt, f_dd })
}
