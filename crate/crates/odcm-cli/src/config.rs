//! Scenario configuration: strict JSON with a version gate.
//!
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default in the middle of a sweep.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum SpectrumConfig {
    /// Single Lorentzian peak; `delta` detunes its center.
    Lorentzian {
        gamma: f64,
        t_c: f64,
        #[serde(default)]
        delta: f64,
    },
    /// Banded `A/|omega|` spectrum between the two cutoffs.
    OneOverF {
        amplitude: f64,
        omega_min: f64,
        omega_max: f64,
    },
    /// Sum of Lorentzian peaks.
    MultiPeak { peaks: Vec<PeakConfig> },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PeakConfig {
    pub weight: f64,
    pub center: f64,
    pub t_c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_tol_phase")]
    pub tol_phase: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            damping: default_damping(),
            tol_phase: default_tol_phase(),
            max_iter: default_max_iter(),
        }
    }
}

fn default_damping() -> f64 {
    0.5
}
fn default_tol_phase() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DdSection {
    pub nu_pulse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSection {
    pub sigma_rel: f64,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
}

fn default_seeds() -> u64 {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_mc_seed")]
    pub seed: u64,
    /// Sampling grid for the dense covariance factorization; kept coarser
    /// than the solver grid because the factorization is O(N^3).
    #[serde(default = "default_mc_grid")]
    pub grid_points: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            realizations: default_realizations(),
            seed: default_mc_seed(),
            grid_points: default_mc_grid(),
        }
    }
}

fn default_realizations() -> usize {
    10_000
}
fn default_mc_seed() -> u64 {
    42
}
fn default_mc_grid() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FrequencySection {
    pub omega_max: f64,
    pub half_points: usize,
}

impl Default for FrequencySection {
    fn default() -> Self {
        Self { omega_max: 60.0, half_points: 3000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u64,
    pub name: String,
    pub spectrum: SpectrumConfig,
    pub t_total: f64,
    pub grid_points: usize,
    pub energies: Vec<f64>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub dd: Option<DdSection>,
    #[serde(default)]
    pub linearized_from_dd: bool,
    #[serde(default)]
    pub positivity: bool,
    #[serde(default)]
    pub robustness: Option<RobustnessSection>,
    #[serde(default)]
    pub mc: Option<McSection>,
    #[serde(default)]
    pub frequency: FrequencySection,
    /// Fidelity coefficient for the report.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {}; this build reads version {CONFIG_VERSION}",
                self.version
            );
        }
        if self.name.is_empty() {
            bail!("scenario name must not be empty");
        }
        if !(self.t_total > 0.0) {
            bail!("t_total must be positive, got {}", self.t_total);
        }
        if self.grid_points < 2 {
            bail!("grid_points must be >= 2, got {}", self.grid_points);
        }
        if self.energies.is_empty() {
            bail!("energy list must not be empty");
        }
        for (i, e) in self.energies.iter().enumerate() {
            if !(*e > 0.0) {
                bail!("energies[{i}] must be positive, got {e}");
            }
            if i > 0 && self.energies[i - 1] >= *e {
                bail!(
                    "energy list must be strictly increasing; energies[{}] = {} >= energies[{i}] = {e}",
                    i - 1,
                    self.energies[i - 1]
                );
            }
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            bail!("solver.damping must be in (0, 1], got {}", self.solver.damping);
        }
        if !(self.solver.tol_phase > 0.0) {
            bail!("solver.tol_phase must be positive");
        }
        if self.solver.max_iter < 1 {
            bail!("solver.max_iter must be >= 1");
        }
        match &self.spectrum {
            SpectrumConfig::Lorentzian { gamma, t_c, .. } => {
                if !(*gamma > 0.0) || !(*t_c > 0.0) {
                    bail!("lorentzian spectrum needs gamma > 0 and t_c > 0");
                }
            }
            SpectrumConfig::OneOverF { amplitude, omega_min, omega_max } => {
                if !(*amplitude > 0.0) || !(*omega_min > 0.0) || !(*omega_max > *omega_min) {
                    bail!("one_over_f spectrum needs amplitude > 0 and 0 < omega_min < omega_max");
                }
            }
            SpectrumConfig::MultiPeak { peaks } => {
                if peaks.is_empty() {
                    bail!("multi_peak spectrum needs at least one peak");
                }
                for (i, p) in peaks.iter().enumerate() {
                    if !(p.weight > 0.0) || !(p.t_c > 0.0) {
                        bail!("peaks[{i}] needs weight > 0 and t_c > 0");
                    }
                }
            }
        }
        if let Some(dd) = &self.dd {
            if !(dd.nu_pulse > 0.0) {
                bail!("dd.nu_pulse must be positive, got {}", dd.nu_pulse);
            }
        }
        if self.linearized_from_dd && self.dd.is_none() {
            bail!("linearized_from_dd requires the dd section");
        }
        if let Some(r) = &self.robustness {
            if !(r.sigma_rel >= 0.0) {
                bail!("robustness.sigma_rel must be >= 0, got {}", r.sigma_rel);
            }
            if r.seeds == 0 {
                bail!("robustness.seeds must be >= 1");
            }
        }
        if let Some(mc) = &self.mc {
            if mc.realizations < 2 {
                bail!("mc.realizations must be >= 2");
            }
            if mc.grid_points < 2 {
                bail!("mc.grid_points must be >= 2");
            }
        }
        if !(self.frequency.omega_max > 0.0) || self.frequency.half_points < 8 {
            bail!("frequency section needs omega_max > 0 and half_points >= 8");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            bail!("alpha must be in (0, 1], got {}", self.alpha);
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "version": 1,
            "name": "a",
            "spectrum": {"type": "lorentzian", "gamma": 1.0, "t_c": 1.0},
            "t_total": 10.0,
            "grid_points": 256,
            "energies": [10.0, 20.0]
        })
    }

    #[test]
    fn minimal_config_parses() {
        let s: Scenario = serde_json::from_value(base_json()).unwrap();
        s.validate().unwrap();
        assert_eq!(s.solver.max_iter, 400);
        assert_eq!(s.alpha, 1.0);
        assert!(s.dd.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = base_json();
        v["grid_pionts"] = serde_json::json!(128);
        assert!(serde_json::from_value::<Scenario>(v).is_err());
        let mut v = base_json();
        v["spectrum"]["gama"] = serde_json::json!(2.0);
        assert!(serde_json::from_value::<Scenario>(v).is_err());
    }

    #[test]
    fn version_gate() {
        let mut v = base_json();
        v["version"] = serde_json::json!(2);
        let s: Scenario = serde_json::from_value(v).unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn energies_must_increase() {
        let mut v = base_json();
        v["energies"] = serde_json::json!([20.0, 10.0]);
        let s: Scenario = serde_json::from_value(v).unwrap();
        assert!(s.validate().is_err());
        let mut v = base_json();
        v["energies"] = serde_json::json!([]);
        let s: Scenario = serde_json::from_value(v).unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn linearized_needs_dd() {
        let mut v = base_json();
        v["linearized_from_dd"] = serde_json::json!(true);
        let s: Scenario = serde_json::from_value(v).unwrap();
        assert!(s.validate().is_err());
    }
}
