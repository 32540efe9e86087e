//! Report assembly and CSV/JSON emission.
//!
//! CSV schemas are stable: `sweep.csv` carries
//! `E_requested,E_realized,R_opt,R_dd,R_dd_refined,R_unmod,normalized_opt,normalized_dd,converged,residual`,
//! `field_E<value>.csv` carries `t,omega,phi` and `overlay_E<value>.csv`
//! carries `omega,G,F_opt,F_dd`. Numbers are written in Rust's shortest
//! round-trip form, so rerunning a scenario reproduces the files bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use odcm_core::control::ControlField;

use crate::config::Scenario;
use crate::run::{McValidation, Overlay, PointReport, RobustnessReport, SweepPoint};

/// The full reproducible record of a run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: u64,
    pub scenario: Scenario,
    pub r_unmod: f64,
    pub points: Vec<PointReport>,
    pub failures: Vec<(f64, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robustness: Option<Vec<RobustnessReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<Vec<McValidation>>,
}

/// Energy tag for file names: integral values lose the trailing `.0`.
pub fn energy_tag(e: f64) -> String {
    if e == e.trunc() && e.abs() < 1e15 {
        format!("{}", e as i64)
    } else {
        format!("{e}")
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(points: &[PointReport]) -> String {
    let mut out = String::from(
        "E_requested,E_realized,R_opt,R_dd,R_dd_refined,R_unmod,normalized_opt,normalized_dd,converged,residual\n",
    );
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.e_requested,
            p.e_realized,
            p.r_opt,
            opt_num(p.r_dd),
            opt_num(p.r_dd_refined),
            p.r_unmod,
            p.normalized_opt,
            opt_num(p.normalized_dd),
            p.converged,
            p.residual
        ));
    }
    out
}

pub fn field_csv(field: &ControlField) -> String {
    let grid = field.grid();
    let mut out = String::from("t,omega,phi\n");
    for (i, t) in grid.times().enumerate() {
        out.push_str(&format!("{},{},{}\n", t, field.amplitude()[i], field.phase()[i]));
    }
    out
}

pub fn overlay_csv(overlay: &Overlay) -> String {
    let mut out = String::from("omega,G,F_opt,F_dd\n");
    for i in 0..overlay.omegas.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            overlay.omegas[i],
            overlay.g[i],
            overlay.f_opt[i],
            overlay.f_dd.as_ref().map(|f| f[i].to_string()).unwrap_or_default()
        ));
    }
    out
}

pub fn robustness_csv(reports: &[RobustnessReport]) -> String {
    let mut out = String::from("E_requested,seed,R_base,R_perturbed,relative_increase\n");
    for rep in reports {
        for row in &rep.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                rep.e_requested, row.seed, rep.r_base, row.r_perturbed, row.relative_increase
            ));
        }
    }
    out
}

pub fn mc_csv(validations: &[McValidation]) -> String {
    let mut out = String::from("field,energy,R_mc,stderr,R_quadrature,z_score\n");
    for v in validations {
        for row in &v.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.field, row.energy, row.r_mc, row.stderr, row.r_quadrature, row.z_score
            ));
        }
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<PathBuf> {
    let json = serde_json::to_string_pretty(report).context("cannot serialize report")?;
    write_text(dir, "report.json", &(json + "\n"))
}

/// Writes the per-point artifacts (field and overlay CSVs) for one energy.
pub fn write_point_csvs(dir: &Path, point: &SweepPoint, overlay: &Overlay) -> Result<()> {
    let tag = energy_tag(point.report.e_requested);
    write_text(dir, &format!("field_E{tag}.csv"), &field_csv(&point.fields.optimal))?;
    write_text(dir, &format!("overlay_E{tag}.csv"), &overlay_csv(overlay))?;
    Ok(())
}
