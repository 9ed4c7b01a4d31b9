use crate::error::{check_dim, Error, Result};
use crate::state::Observable;

/// A continuously monitored observable.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    pub observable: Observable,
    /// Characteristic measurement time τ_m (inverse measurement strength).
    pub tau_m: f64,
    /// Fraction of this channel's record seen by a [`AgentSpec::Filtered`] agent.
    pub eta: f64,
}

impl MeasurementChannel {
    pub fn new(observable: Observable, tau_m: f64) -> Result<Self> {
        if !(tau_m > 0.0) || !tau_m.is_finite() {
            return Err(Error::OutOfRange(format!("tau_m = {tau_m} must be > 0")));
        }
        Ok(Self {
            observable,
            tau_m,
            eta: 1.0,
        })
    }

    pub fn with_efficiency(mut self, eta: f64) -> Result<Self> {
        check_efficiency(eta)?;
        self.eta = eta;
        Ok(self)
    }

    /// Coefficient 1/(8 τ_m) of the double commutator in the dissipator.
    pub fn dephasing_rate(&self) -> f64 {
        1.0 / (8.0 * self.tau_m)
    }
}

pub(crate) fn check_efficiency(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidEfficiency(eta))
    }
}

/// Measurement times of the two sub-channels an efficiency-η split produces:
/// (τ_m/η, τ_m/(1-η)), with `f64::INFINITY` for an empty sub-channel.
pub fn split_times(tau_m: f64, eta: f64) -> Result<(f64, f64)> {
    check_efficiency(eta)?;
    let seen = if eta > 0.0 {
        tau_m / eta
    } else {
        f64::INFINITY
    };
    let hidden = if eta < 1.0 {
        tau_m / (1.0 - eta)
    } else {
        f64::INFINITY
    };
    Ok((seen, hidden))
}

/// Largest allowed dt as a fraction of the shortest measurement time.
pub const DT_GUARD: f64 = 0.01;

/// Hamiltonian, monitored channels and time grid of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub hamiltonian: Observable,
    pub channels: Vec<MeasurementChannel>,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(
        hamiltonian: Observable,
        channels: Vec<MeasurementChannel>,
        dt: f64,
        n_steps: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            hamiltonian,
            channels,
            dt,
            n_steps,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.hamiltonian.dim();
        for ch in &self.channels {
            check_dim(dim, ch.observable.dim())?;
            if !(ch.tau_m > 0.0) {
                return Err(Error::OutOfRange(format!(
                    "tau_m = {} must be > 0",
                    ch.tau_m
                )));
            }
            check_efficiency(ch.eta)?;
            // The split sub-channels must dephase at the unsplit rate.
            let (seen, hidden) = split_times(ch.tau_m, ch.eta)?;
            let total = 1.0 / (8.0 * seen) + 1.0 / (8.0 * hidden);
            if (total - ch.dephasing_rate()).abs() > 1e-12 * ch.dephasing_rate() {
                return Err(Error::Config(format!(
                    "efficiency split of channel with tau_m {} does not conserve the dephasing rate",
                    ch.tau_m
                )));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::StepTooLarge(format!("dt = {} must be > 0", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::OutOfRange("n_steps must be positive".into()));
        }
        if let Some(tau_min) = self.min_tau() {
            if self.dt > DT_GUARD * tau_min * (1.0 + 1e-12) {
                return Err(Error::StepTooLarge(format!(
                    "dt = {} exceeds {DT_GUARD} x min tau_m = {}",
                    self.dt,
                    DT_GUARD * tau_min
                )));
            }
        }
        let rate = self.stiffness();
        if self.dt * rate > RK4_STABILITY {
            return Err(Error::StepTooLarge(format!(
                "dt = {} too large for the generator's spectral radius {rate:.3} (need dt <= {:.3e})",
                self.dt,
                RK4_STABILITY / rate
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn min_tau(&self) -> Option<f64> {
        self.channels.iter().map(|c| c.tau_m).reduce(f64::min)
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Upper estimate of the largest |eigenvalue| of the Lindblad generator.
    pub fn stiffness(&self) -> f64 {
        let spread = |o: &Observable| {
            let s = o.spectrum();
            s.eigenvalues[0] - s.min()
        };
        let h = spread(&self.hamiltonian);
        let d: f64 = self
            .channels
            .iter()
            .map(|c| spread(&c.observable).powi(2) * c.dephasing_rate())
            .sum();
        h + d
    }
}

/// |λ dt| below which classical RK4 is stable on both axes.
pub const RK4_STABILITY: f64 = 2.5;

/// Who an agent is, described by how much of each channel's record it sees.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    /// Sees every record: the complete description ρ_O.
    Omniscient,
    /// Sees nothing: the unconditioned description ρ_A.
    Blind,
    /// Sees the same fraction η of every channel.
    Partial(f64),
    /// Sees fraction `channel.eta` of each channel.
    Filtered,
    /// Explicit per-channel fractions, e.g. `[1, 0]` for an agent that reads
    /// only the first of two channels.
    PerChannel(Vec<f64>),
}

impl AgentSpec {
    pub fn efficiencies(&self, channels: &[MeasurementChannel]) -> Result<Vec<f64>> {
        let effs = match self {
            AgentSpec::Omniscient => vec![1.0; channels.len()],
            AgentSpec::Blind => vec![0.0; channels.len()],
            AgentSpec::Partial(eta) => vec![*eta; channels.len()],
            AgentSpec::Filtered => channels.iter().map(|c| c.eta).collect(),
            AgentSpec::PerChannel(v) => {
                if v.len() != channels.len() {
                    return Err(Error::DimensionMismatch {
                        expected: channels.len(),
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        for &e in &effs {
            check_efficiency(e)?;
        }
        Ok(effs)
    }

    pub fn label(&self) -> String {
        match self {
            AgentSpec::Omniscient => "omniscient".into(),
            AgentSpec::Blind => "blind".into(),
            AgentSpec::Partial(eta) => format!("partial_{eta}"),
            AgentSpec::Filtered => "filtered".into(),
            AgentSpec::PerChannel(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                format!("channels_{}", parts.join("_"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{jz, pauli_z};

    fn qubit(dt: f64) -> Result<SimulationConfig> {
        SimulationConfig::new(
            Observable::zero(2),
            vec![MeasurementChannel::new(pauli_z(), 1.0)?],
            dt,
            10,
            0,
        )
    }

    #[test]
    fn dt_guard() {
        assert!(qubit(0.01).is_ok());
        assert!(matches!(qubit(0.02), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn stiffness_guard_for_wide_spectra() {
        let ch = MeasurementChannel::new(jz(50), 1.0).unwrap();
        let cfg = SimulationConfig::new(Observable::zero(50), vec![ch.clone()], 0.01, 10, 0);
        assert!(matches!(cfg, Err(Error::StepTooLarge(_))));
        assert!(SimulationConfig::new(Observable::zero(50), vec![ch], 0.0025, 10, 0).is_ok());
    }

    #[test]
    fn efficiencies_validated() {
        assert!(matches!(
            MeasurementChannel::new(pauli_z(), 1.0)
                .unwrap()
                .with_efficiency(1.5),
            Err(Error::InvalidEfficiency(_))
        ));
        let chans = vec![MeasurementChannel::new(pauli_z(), 1.0).unwrap()];
        assert_eq!(
            AgentSpec::Partial(0.3).efficiencies(&chans).unwrap(),
            vec![0.3]
        );
        assert!(AgentSpec::Partial(-0.1).efficiencies(&chans).is_err());
        assert!(AgentSpec::PerChannel(vec![1.0, 0.0])
            .efficiencies(&chans)
            .is_err());
    }

    #[test]
    fn split_conserves_rate() {
        for eta in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let (a, b) = split_times(2.0, eta).unwrap();
            let total = 1.0 / (8.0 * a) + 1.0 / (8.0 * b);
            assert!((total - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = SimulationConfig::new(
            Observable::zero(3),
            vec![MeasurementChannel::new(pauli_z(), 1.0).unwrap()],
            0.001,
            1,
            0,
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
