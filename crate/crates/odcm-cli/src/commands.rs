//! Verb implementations shared by the binary and the integration tests.

use std::path::Path;

use anyhow::{anyhow, Result};

use crate::config::{RobustnessSection, Scenario};
use crate::plot::{line_chart, Series};
use crate::report::{
    energy_tag, mc_csv, overlay_csv, robustness_csv, sweep_csv, write_point_csvs, write_report,
    write_text, RunReport,
};
use crate::run::{
    build_overlay, robustness_study, run_sweep, validate_mc, Overlay, ScenarioContext,
    SweepOutcome, SweepPoint,
};

/// Error classified for the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(anyhow::Error),
    /// Every sweep point failed (exit 3).
    AllPointsFailed(Vec<(f64, String)>),
    /// Output emission failed (exit 4).
    Io(anyhow::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e:#}"),
            CliError::AllPointsFailed(fails) => {
                writeln!(f, "all sweep points failed:")?;
                for (e, msg) in fails {
                    writeln!(f, "  E = {e}: {msg}")?;
                }
                Ok(())
            }
            CliError::Io(e) => write!(f, "i/o error: {e:#}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => crate::exit_code::CONFIG_ERROR,
            CliError::AllPointsFailed(_) => crate::exit_code::ALL_POINTS_FAILED,
            CliError::Io(_) => crate::exit_code::IO_ERROR,
        }
    }
}

type CmdResult = std::result::Result<(), CliError>;

fn io<T>(r: Result<T>) -> std::result::Result<T, CliError> {
    r.map_err(CliError::Io)
}

/// Loads and validates the scenario, applying the `--seed` override to the
/// stochastic sections.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> std::result::Result<Scenario, CliError> {
    let mut scenario = Scenario::load(path).map_err(CliError::Config)?;
    if let (Some(s), Some(mc)) = (seed, scenario.mc.as_mut()) {
        mc.seed = s;
    }
    Ok(scenario)
}

fn build_context(scenario: Scenario) -> std::result::Result<ScenarioContext, CliError> {
    ScenarioContext::build(scenario).map_err(CliError::Config)
}

fn sweep_or_fail(ctx: &ScenarioContext) -> std::result::Result<SweepOutcome, CliError> {
    let outcome = run_sweep(ctx);
    if outcome.points.is_empty() {
        return Err(CliError::AllPointsFailed(outcome.failures));
    }
    Ok(outcome)
}

fn base_report(ctx: &ScenarioContext, outcome: &SweepOutcome) -> RunReport {
    RunReport {
        version: crate::config::CONFIG_VERSION,
        scenario: ctx.scenario.clone(),
        r_unmod: ctx.r_unmod,
        points: outcome.points.iter().map(|p| p.report.clone()).collect(),
        failures: outcome.failures.clone(),
        robustness: None,
        mc: None,
    }
}

fn overlays(
    ctx: &ScenarioContext,
    outcome: &SweepOutcome,
) -> std::result::Result<Vec<Overlay>, CliError> {
    outcome
        .points
        .iter()
        .map(|p| build_overlay(ctx, p).map_err(CliError::Config))
        .collect()
}

fn emit_overlay_svg(out: &Path, point: &SweepPoint, overlay: &Overlay) -> Result<()> {
    let mut series = vec![
        Series {
            name: "G",
            points: overlay.omegas.iter().cloned().zip(overlay.g.iter().cloned()).collect(),
            markers: false,
        },
        Series {
            name: "F_opt",
            points: overlay.omegas.iter().cloned().zip(overlay.f_opt.iter().cloned()).collect(),
            markers: false,
        },
    ];
    if let Some(f_dd) = &overlay.f_dd {
        series.push(Series {
            name: "F_dd",
            points: overlay.omegas.iter().cloned().zip(f_dd.iter().cloned()).collect(),
            markers: false,
        });
    }
    let tag = energy_tag(point.report.e_requested);
    let svg = line_chart(&format!("spectral overlay, E = {tag}"), "omega", "G, F_T", &series);
    write_text(out, &format!("overlay_E{tag}.svg"), &svg)?;
    Ok(())
}

fn emit_sweep_svg(out: &Path, outcome: &SweepOutcome) -> Result<()> {
    let pts = &outcome.points;
    let mut series = vec![Series {
        name: "R_opt",
        points: pts.iter().map(|p| (p.report.e_realized, p.report.r_opt)).collect(),
        markers: true,
    }];
    if pts.iter().any(|p| p.report.r_dd.is_some()) {
        series.push(Series {
            name: "R_dd",
            points: pts
                .iter()
                .filter_map(|p| p.report.r_dd.map(|r| (p.report.e_realized, r)))
                .collect(),
            markers: true,
        });
    }
    if pts.iter().any(|p| p.report.r_dd_refined.is_some()) {
        series.push(Series {
            name: "R_dd_refined",
            points: pts
                .iter()
                .filter_map(|p| p.report.r_dd_refined.map(|r| (p.report.e_realized, r)))
                .collect(),
            markers: true,
        });
    }
    series.push(Series {
        name: "R_unmod",
        points: pts.iter().map(|p| (p.report.e_realized, p.report.r_unmod)).collect(),
        markers: false,
    });
    let svg = line_chart("dephasing rate vs energy", "E_realized", "R", &series);
    write_text(out, "sweep.svg", &svg)?;
    Ok(())
}

/// `solve`: single-energy run with full per-field artifacts.
pub fn cmd_solve(scenario: Scenario, out: &Path) -> CmdResult {
    if scenario.energies.len() != 1 {
        return Err(CliError::Config(anyhow!(
            "the solve verb needs exactly one energy in the config, got {}",
            scenario.energies.len()
        )));
    }
    let ctx = build_context(scenario)?;
    let outcome = sweep_or_fail(&ctx)?;
    let ovs = overlays(&ctx, &outcome)?;
    io(write_report(out, &base_report(&ctx, &outcome)))?;
    for (p, ov) in outcome.points.iter().zip(&ovs) {
        io(write_point_csvs(out, p, ov))?;
        io(emit_overlay_svg(out, p, ov))?;
    }
    Ok(())
}

/// `sweep`: the full energy sweep with sweep table and plots.
pub fn cmd_sweep(scenario: Scenario, out: &Path) -> CmdResult {
    let ctx = build_context(scenario)?;
    let outcome = sweep_or_fail(&ctx)?;
    let ovs = overlays(&ctx, &outcome)?;
    io(write_report(out, &base_report(&ctx, &outcome)))?;
    io(write_text(out, "sweep.csv", &sweep_csv(&base_report(&ctx, &outcome).points)))?;
    for (p, ov) in outcome.points.iter().zip(&ovs) {
        io(write_point_csvs(out, p, ov))?;
        io(emit_overlay_svg(out, p, ov))?;
    }
    io(emit_sweep_svg(out, &outcome))?;
    Ok(())
}

/// `spectra`: overlay data only.
pub fn cmd_spectra(scenario: Scenario, out: &Path) -> CmdResult {
    let ctx = build_context(scenario)?;
    let outcome = sweep_or_fail(&ctx)?;
    let ovs = overlays(&ctx, &outcome)?;
    io(write_report(out, &base_report(&ctx, &outcome)))?;
    for (p, ov) in outcome.points.iter().zip(&ovs) {
        let tag = energy_tag(p.report.e_requested);
        io(write_text(out, &format!("overlay_E{tag}.csv"), &overlay_csv(ov)))?;
        io(emit_overlay_svg(out, p, ov))?;
    }
    Ok(())
}

/// `robustness`: perturbation study of the solved optimum at every energy.
pub fn cmd_robustness(scenario: Scenario, out: &Path, seed: Option<u64>) -> CmdResult {
    let section = scenario
        .robustness
        .clone()
        .unwrap_or(RobustnessSection { sigma_rel: 0.1, seeds: 32 });
    let ctx = build_context(scenario)?;
    let outcome = sweep_or_fail(&ctx)?;
    let base_seed = seed.unwrap_or(0);
    let reports = outcome
        .points
        .iter()
        .map(|p| {
            robustness_study(
                &ctx,
                &section,
                p.report.e_requested,
                &p.fields.optimal,
                base_seed,
            )
            .map_err(CliError::Config)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut report = base_report(&ctx, &outcome);
    report.robustness = Some(reports);
    io(write_text(
        out,
        "robustness.csv",
        &robustness_csv(report.robustness.as_deref().unwrap()),
    ))?;
    io(write_report(out, &report))?;
    Ok(())
}

/// `validate-mc`: Monte-Carlo cross-check of the rate quadrature.
pub fn cmd_validate_mc(scenario: Scenario, out: &Path) -> CmdResult {
    let section = scenario.mc.clone().unwrap_or_default();
    let ctx = build_context(scenario)?;
    let outcome = sweep_or_fail(&ctx)?;
    let validations = outcome
        .points
        .iter()
        .map(|p| {
            validate_mc(&ctx, &section, p.report.e_requested, &p.fields.optimal)
                .map_err(CliError::Config)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut report = base_report(&ctx, &outcome);
    report.mc = Some(validations);
    io(write_text(out, "mc.csv", &mc_csv(report.mc.as_deref().unwrap())))?;
    io(write_report(out, &report))?;
    Ok(())
}
