//! TOML experiment configuration, one optional section per subcommand.
//!
//! ```toml
//! [jz]
//! levels = 50
//! etas = [0.0, 0.5, 0.9]
//!
//! [multi-agent]
//! channels = ["z", "x"]
//! ```
//!
//! Unknown keys are rejected with their location; missing keys take the
//! defaults below.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::sme::StepperKind;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub jz: JzConfig,
    pub oscillator_curves: OscillatorCurvesConfig,
    pub qubit_verify: QubitVerifyConfig,
    pub multi_agent: MultiAgentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            ExperimentError::Config(msg) => {
                ExperimentError::Config(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }
}

/// Relative-entropy curves for a J_z-monitored spin with L levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JzConfig {
    pub levels: usize,
    pub tau_m: f64,
    pub dt: f64,
    pub t_final: f64,
    pub etas: Vec<f64>,
    pub n_trajectories: usize,
    pub seed: u64,
    /// Steps between output rows.
    pub sample_stride: usize,
    /// Centre of the initial Gaussian over the levels m.
    pub initial_mean: f64,
    /// Width of the initial Gaussian; √(L/4) when absent.
    pub initial_std: Option<f64>,
    pub stepper: StepperKind,
    /// Also write every trajectory's samples.
    pub per_trajectory: bool,
}

impl Default for JzConfig {
    fn default() -> Self {
        Self {
            levels: 50,
            tau_m: 1.0,
            dt: 0.0025,
            t_final: 4.0,
            etas: vec![0.0, 0.5, 0.9],
            n_trajectories: 200,
            seed: 1,
            sample_stride: 40,
            initial_mean: 0.0,
            initial_std: None,
            stepper: StepperKind::Kraus,
            per_trajectory: false,
        }
    }
}

/// Steady-state Gaussian transition curves over an efficiency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorCurvesConfig {
    /// Explicit grid; overrides the linear grid below.
    pub etas: Option<Vec<f64>>,
    pub eta_min: f64,
    pub eta_max: f64,
    pub points: usize,
    /// Range over which the derivative column is checked against finite
    /// differences of the entropy column.
    pub check_min: f64,
    pub check_max: f64,
    pub derivative_tolerance: f64,
}

impl Default for OscillatorCurvesConfig {
    fn default() -> Self {
        Self {
            etas: None,
            eta_min: 1e-4,
            eta_max: 1.0,
            points: 10_000,
            check_min: 0.05,
            check_max: 0.95,
            derivative_tolerance: 1e-4,
        }
    }
}

/// Analytic regression suite for a σ_z-monitored qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QubitVerifyConfig {
    pub tau_m: f64,
    pub dt: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    pub coherence_times: Vec<f64>,
    pub coherence_tolerance: f64,
    /// Short-time window as a fraction of the decoherence time.
    pub short_time_fraction: f64,
    /// Horizon of the commutator-rate identity.
    pub identity_time: f64,
    pub identity_tolerance: f64,
    /// Steps of the Kraus-versus-diffusive comparison.
    pub stepper_steps: usize,
    /// Bloch vector of the (mixed) start of that comparison.
    pub stepper_initial_bloch: [f64; 3],
}

impl Default for QubitVerifyConfig {
    fn default() -> Self {
        Self {
            tau_m: 1.0,
            dt: 1e-3,
            n_trajectories: 2000,
            seed: 1,
            coherence_times: vec![0.5, 1.0, 2.0],
            coherence_tolerance: 1e-8,
            short_time_fraction: 0.05,
            identity_time: 1.0,
            identity_tolerance: 1e-6,
            stepper_steps: 100,
            stepper_initial_bloch: [0.4, 0.0, 0.3],
        }
    }
}

/// Qubit watched through several Pauli channels, one agent per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiAgentConfig {
    /// Pauli axis per channel: "x", "y" or "z".
    pub channels: Vec<String>,
    pub tau_m: Vec<f64>,
    pub initial_bloch: [f64; 3],
    pub dt: f64,
    pub t_final: f64,
    pub n_trajectories: usize,
    pub seed: u64,
    pub sample_stride: usize,
    pub stepper: StepperKind,
}

impl Default for MultiAgentConfig {
    fn default() -> Self {
        Self {
            channels: vec!["z".into(), "x".into()],
            tau_m: vec![1.0, 1.0],
            initial_bloch: [1.0, 0.0, 1.0],
            dt: 0.01,
            t_final: 4.0,
            n_trajectories: 2000,
            seed: 1,
            sample_stride: 40,
            stepper: StepperKind::Kraus,
        }
    }
}

/// Number of steps of size `dt` spanning `t_final`, which must be a
/// multiple of `dt`.
pub(crate) fn step_count(section: &str, dt: f64, t_final: f64) -> Result<usize, ExperimentError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ExperimentError::Config(format!(
            "{section}.dt = {dt} must be positive"
        )));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(ExperimentError::Config(format!(
            "{section}.t_final = {t_final} must be positive"
        )));
    }
    let n = (t_final / dt).round();
    if (n * dt - t_final).abs() > 1e-9 * t_final {
        return Err(ExperimentError::Config(format!(
            "{section}.t_final = {t_final} is not a multiple of {section}.dt = {dt}"
        )));
    }
    Ok(n as usize)
}

pub(crate) fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), ExperimentError> {
    if ok {
        Ok(())
    } else {
        Err(ExperimentError::Config(msg()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn sections_and_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "[jz]\nlevels = 20\netas = [0.0, 1.0]\nstepper = \"diffusive\"\n\n[multi-agent]\nchannels = [\"z\", \"y\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.jz.levels, 20);
        assert_eq!(cfg.jz.stepper, StepperKind::Diffusive);
        assert_eq!(cfg.jz.tau_m, 1.0);
        assert_eq!(cfg.multi_agent.channels, vec!["z", "y"]);
    }

    #[test]
    fn unknown_keys_report_location() {
        let err = ExperimentConfig::from_toml("[jz]\nlevels = 20\nlevles = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("levles"), "{msg}");
        assert!(ExperimentConfig::from_toml("[nope]\n").is_err());
        let err = ExperimentConfig::from_toml("[jz]\ndt = \"fast\"\n").unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
    }

    #[test]
    fn step_count_requires_multiples() {
        assert_eq!(step_count("s", 0.01, 4.0).unwrap(), 400);
        assert!(step_count("s", 0.03, 1.0).is_err());
        assert!(step_count("s", 0.0, 1.0).is_err());
        assert!(step_count("s", 0.1, -1.0).is_err());
    }
}
