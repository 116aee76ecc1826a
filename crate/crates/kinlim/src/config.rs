//! Experiment configuration: TOML, with JSON accepted by file extension.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibria::{GridSpec, KernelKind, ModelParams};
use crate::error::{KinlimError, Result};
use crate::fluid_mode::{check_sweep, ModeOptions};
use crate::kinetic_solver::StudySpec;

/// `η` sweep. Without `eta0` the first value is chosen by the eigenvalue-separation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default = "half")]
    pub eta_ratio: f64,
    #[serde(default = "six")]
    pub eta_count: usize,
    /// Direction `σ = ±1`.
    #[serde(default = "one")]
    pub sigma: f64,
}

fn half() -> f64 {
    0.5
}
fn six() -> usize {
    6
}
fn one() -> f64 {
    1.0
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { eta0: Some(0.1), eta_ratio: 0.5, eta_count: 6, sigma: 1.0 }
    }
}

impl SweepConfig {
    /// Geometric sweep from `eta0`.
    pub fn etas_from(&self, eta0: f64) -> Result<Vec<f64>> {
        let etas: Vec<f64> = (0..self.eta_count).map(|k| eta0 * self.eta_ratio.powi(k as i32)).collect();
        check_sweep(&etas)?;
        Ok(etas)
    }
}

/// Kinetic-versus-macroscopic convergence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub eps: Vec<f64>,
    /// Frequency of the single-mode initial data `cos(ξ₀ x)`.
    pub xi0: f64,
    pub t_end: f64,
    pub n_uniform: usize,
    pub n_geometric: usize,
    /// Replaces the theoretical `κ` in the macroscopic run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_override: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let s = StudySpec::default();
        Self { eps: s.eps_list, xi0: s.xi0, t_end: s.t_end, n_uniform: s.n_uniform, n_geometric: s.n_geometric, kappa_override: None }
    }
}

impl SimulateConfig {
    pub fn study(&self) -> StudySpec {
        StudySpec {
            eps_list: self.eps.clone(),
            xi0: self.xi0,
            t_end: self.t_end,
            n_uniform: self.n_uniform,
            n_geometric: self.n_geometric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("kinlim-out") }
    }
}

/// Solver tolerances and `--check` thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub mode_tol: f64,
    pub ambiguity: f64,
    /// Relative deviation allowed between extrapolated and theoretical `μ₀`.
    pub mu0_rel: f64,
    /// Relative agreement required between generic and closed-form `κ`.
    pub kappa_rel: f64,
    /// Minimum fitted order of the convergence study.
    pub min_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { mode_tol: 1e-11, ambiguity: 1.01, mu0_rel: 0.05, kappa_rel: 1e-6, min_order: 0.2 }
    }
}

impl Tolerances {
    pub fn mode_options(&self) -> ModeOptions {
        ModeOptions { tol: self.mode_tol, ambiguity: self.ambiguity, ..ModeOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::scattering(1, 1.0, 1.0, 1.0, KernelKind::Product).expect("valid default model"),
            grid: GridSpec { n: 600, vmax: 1e5, ..GridSpec::default() },
            sweep: SweepConfig::default(),
            simulate: SimulateConfig::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| KinlimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| KinlimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; `.json` files are parsed as JSON, everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KinlimError::Config(format!("cannot read {}: {e}", path.display())))?;
        if is_json(path) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| KinlimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.model.require_macro()?;
        if let Some(eta0) = self.sweep.eta0 {
            self.sweep.etas_from(eta0)?;
        } else if !(self.sweep.eta_ratio > 0.0 && self.sweep.eta_ratio < 1.0) || self.sweep.eta_count == 0 {
            return Err(KinlimError::Config("eta sweep needs a ratio in (0,1) and a positive count".into()));
        }
        if (self.sweep.sigma.abs() - 1.0).abs() > 1e-12 {
            return Err(KinlimError::Config("sigma must be +1 or -1".into()));
        }
        let s = &self.simulate;
        if s.eps.len() >= 2 {
            check_sweep(&s.eps)?;
        } else if s.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(KinlimError::Config("eps values must lie in (0, 1)".into()));
        }
        if !(s.xi0 > 0.0) || !(s.t_end > 0.0) || s.n_uniform == 0 {
            return Err(KinlimError::Config("simulate needs xi0 > 0, t_end > 0 and n_uniform ≥ 1".into()));
        }
        if let Some(k) = s.kappa_override {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(KinlimError::Config(format!("kappa_override must be a finite non-negative number, got {k}")));
            }
        }
        Ok(())
    }
}
