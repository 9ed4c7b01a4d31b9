//! One physical realization of the monitoring process, seen by several
//! agents at once.
//!
//! Each channel's record is split by efficiency: with distinct agent
//! efficiencies 0 < e_1 < ... < e_k < 1, the channel is treated as
//! independent sub-channels carrying fractions e_1, e_2 - e_1, ..., 1 - e_k of
//! the measurement strength. An agent with efficiency e_i conditions on the
//! first i sub-channels and averages over the rest. The per-step readouts are
//! drawn as a Brownian bridge: the omniscient (total) readout first, then the
//! partial ones given it, so the physical realization does not depend on
//! which agents are watching.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};
use crate::state::{CMatrix, DensityOperator};

use super::channel::{AgentSpec, SimulationConfig};
use super::generator::{Generator, Monitor};
use super::noise::{Gaussian, NoiseKey};
use super::steppers::{diffusive_step, kraus_update, sample_eigenvalue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepperKind {
    /// Gaussian weak-measurement Kraus updates (positive by construction).
    #[default]
    Kraus,
    /// Euler-Maruyama innovation increments with noise consistency between
    /// agents.
    Diffusive,
}

/// Snapshot of every agent's state after a step.
#[derive(Debug, Clone)]
pub struct TrajectoryFrame {
    pub step: usize,
    pub t: f64,
    pub omniscient: DensityOperator,
    /// States in the order of the requested agents.
    pub states: Vec<DensityOperator>,
    /// Omniscient innovation noise per channel over the preceding step.
    pub dw: Vec<f64>,
    /// Full-efficiency readout per channel over the preceding step.
    pub records: Vec<f64>,
}

#[derive(Debug, Clone)]
enum AgentRole {
    /// Reads every channel in full; mirrors ρ_O.
    Omniscient,
    /// Reads nothing; follows the cached deterministic path.
    Blind,
    Conditioned {
        effs: Vec<f64>,
        /// Position in the channel's efficiency ladder, per channel.
        rungs: Vec<Option<usize>>,
        generator: Generator,
    },
}

/// Reusable evolution of one configuration for many trajectory indices.
#[derive(Debug, Clone)]
pub struct TrajectoryRunner {
    config: SimulationConfig,
    initial: DensityOperator,
    agents: Vec<AgentSpec>,
    roles: Vec<AgentRole>,
    stepper: StepperKind,
    stride: usize,
    monitors: Vec<Monitor>,
    ladders: Vec<Vec<f64>>,
    omniscient_generator: Generator,
    blind_frames: Option<Vec<DensityOperator>>,
}

impl TrajectoryRunner {
    pub fn new(
        config: SimulationConfig,
        initial: DensityOperator,
        agents: Vec<AgentSpec>,
        stepper: StepperKind,
        stride: usize,
    ) -> Result<Self> {
        config.validate()?;
        check_dim(config.dim(), initial.dim())?;
        let stride = stride.max(1);
        let monitors: Vec<Monitor> = config.channels.iter().map(Monitor::new).collect();
        let n_ch = monitors.len();

        let effs: Vec<Vec<f64>> = agents
            .iter()
            .map(|a| a.efficiencies(&config.channels))
            .collect::<Result<_>>()?;
        let mut ladders: Vec<Vec<f64>> = vec![Vec::new(); n_ch];
        for e in &effs {
            for (ladder, &x) in ladders.iter_mut().zip(e) {
                if x > 0.0 && x < 1.0 {
                    ladder.push(x);
                }
            }
        }
        for ladder in &mut ladders {
            ladder.sort_by(f64::total_cmp);
            ladder.dedup();
        }

        let dephasing_weights = |e: &[f64]| -> Vec<f64> {
            match stepper {
                StepperKind::Kraus => e.iter().map(|x| 1.0 - x).collect(),
                StepperKind::Diffusive => vec![1.0; e.len()],
            }
        };
        let roles: Vec<AgentRole> = effs
            .iter()
            .map(|e| {
                if e.iter().all(|&x| x == 1.0) {
                    AgentRole::Omniscient
                } else if e.iter().all(|&x| x == 0.0) {
                    AgentRole::Blind
                } else {
                    let rungs = e
                        .iter()
                        .zip(&ladders)
                        .map(|(x, l)| l.iter().position(|y| y == x))
                        .collect();
                    AgentRole::Conditioned {
                        effs: e.clone(),
                        rungs,
                        generator: Generator::new(
                            &config.hamiltonian,
                            &monitors,
                            &dephasing_weights(e),
                        )
                        .prepared(config.dt),
                    }
                }
            })
            .collect();
        let omniscient_generator = Generator::new(
            &config.hamiltonian,
            &monitors,
            &dephasing_weights(&vec![1.0; n_ch]),
        )
        .prepared(config.dt);

        let mut runner = Self {
            config,
            initial,
            agents,
            roles,
            stepper,
            stride,
            monitors,
            ladders,
            omniscient_generator,
            blind_frames: None,
        };
        if runner.roles.iter().any(|r| matches!(r, AgentRole::Blind)) {
            runner.blind_frames = Some(runner.blind_path()?);
        }
        Ok(runner)
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn initial(&self) -> &DensityOperator {
        &self.initial
    }

    pub fn stepper(&self) -> StepperKind {
        self.stepper
    }

    /// The unconditioned states at the frame steps, shared by every blind
    /// agent and every trajectory; `None` when no agent is blind.
    pub fn blind_frames(&self) -> Option<&[DensityOperator]> {
        self.blind_frames.as_deref()
    }

    /// Steps at which frames are emitted: 0, every `stride`, and the last.
    pub fn frame_steps(&self) -> Vec<usize> {
        let n = self.config.n_steps;
        let mut steps: Vec<usize> = (0..=n).step_by(self.stride).collect();
        if *steps.last().unwrap() != n {
            steps.push(n);
        }
        steps
    }

    fn is_frame(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride) || step == self.config.n_steps
    }

    fn blind_path(&self) -> Result<Vec<DensityOperator>> {
        let generator = Generator::full(&self.config).prepared(self.config.dt);
        let mut rho = self.initial.clone();
        let mut out = vec![rho.clone()];
        for step in 1..=self.config.n_steps {
            rho = generator.step(&rho, self.config.dt)?;
            if self.is_frame(step) {
                out.push(rho.clone());
            }
        }
        Ok(out)
    }

    fn frame(
        &self,
        step: usize,
        frame_index: usize,
        rho_o: &DensityOperator,
        states: &[DensityOperator],
        dw: Vec<f64>,
        records: Vec<f64>,
    ) -> TrajectoryFrame {
        let states = self
            .roles
            .iter()
            .zip(states)
            .map(|(role, s)| match role {
                AgentRole::Omniscient => rho_o.clone(),
                AgentRole::Blind => {
                    self.blind_frames.as_ref().expect("cached")[frame_index].clone()
                }
                AgentRole::Conditioned { .. } => s.clone(),
            })
            .collect();
        TrajectoryFrame {
            step,
            t: step as f64 * self.config.dt,
            omniscient: rho_o.clone(),
            states,
            dw,
            records,
        }
    }

    /// Bridge values B(e) for every rung of a channel's ladder, followed by
    /// B(1), all in units of the readout noise σ = √(τ_m/dt).
    fn bridge<R: rand::Rng>(&self, channel: usize, gauss: &mut Gaussian<R>) -> (Vec<f64>, f64) {
        let sigma = (self.monitors[channel].tau_m / self.config.dt).sqrt();
        let total = sigma * gauss.standard();
        let mut values = Vec::with_capacity(self.ladders[channel].len());
        let (mut e_prev, mut b_prev) = (0.0, 0.0);
        for &e in &self.ladders[channel] {
            let frac = (e - e_prev) / (1.0 - e_prev);
            let var = sigma * sigma * (e - e_prev) * (1.0 - e) / (1.0 - e_prev);
            let b = b_prev + frac * (total - b_prev) + var.sqrt() * gauss.standard();
            values.push(b);
            e_prev = e;
            b_prev = b;
        }
        (values, total)
    }

    /// Runs trajectory `index`, returning the sampled frames.
    pub fn run(&self, index: u64) -> Result<Vec<TrajectoryFrame>> {
        let n_ch = self.monitors.len();
        let dt = self.config.dt;
        let mut rho_o = self.initial.clone();
        let mut states: Vec<DensityOperator> = vec![self.initial.clone(); self.roles.len()];
        let mut frames = Vec::with_capacity(self.frame_steps().len());
        frames.push(self.frame(0, 0, &rho_o, &states, vec![0.0; n_ch], vec![0.0; n_ch]));

        for step in 0..self.config.n_steps {
            let mut dw = vec![0.0; n_ch];
            let mut records = vec![0.0; n_ch];
            match self.stepper {
                StepperKind::Kraus => {
                    let mut m_o = rho_o.matrix().clone();
                    let mut m_agents: Vec<Option<CMatrix>> = self
                        .roles
                        .iter()
                        .zip(&states)
                        .map(|(r, s)| match r {
                            AgentRole::Conditioned { .. } => Some(s.matrix().clone()),
                            _ => None,
                        })
                        .collect();
                    for ch in 0..n_ch {
                        let monitor = &self.monitors[ch];
                        let mut gauss = Gaussian::new(self.key(index, step, ch).rng());
                        let center = sample_eigenvalue(monitor, &m_o, gauss.uniform());
                        let (bridge, total) = self.bridge(ch, &mut gauss);
                        let readout = center + total;
                        let mean_o = monitor.mean(&m_o);
                        records[ch] = readout;
                        dw[ch] = (readout - mean_o) * dt / monitor.tau_m.sqrt();
                        m_o = kraus_update(monitor, &m_o, readout, 1.0, dt);
                        for (role, m) in self.roles.iter().zip(m_agents.iter_mut()) {
                            if let (AgentRole::Conditioned { effs, rungs, .. }, Some(m)) = (role, m)
                            {
                                let e = effs[ch];
                                let r = match rungs[ch] {
                                    Some(k) => center + bridge[k] / e,
                                    None if e == 1.0 => readout,
                                    None => continue,
                                };
                                *m = kraus_update(monitor, m, r, e, dt);
                            }
                        }
                    }
                    rho_o = self.omniscient_generator.advance(&m_o, dt)?;
                    for ((role, m), s) in self.roles.iter().zip(m_agents).zip(states.iter_mut()) {
                        if let (AgentRole::Conditioned { generator, .. }, Some(m)) = (role, m) {
                            *s = generator.advance(&m, dt)?;
                        }
                    }
                }
                StepperKind::Diffusive => {
                    let mut agent_noise: Vec<Vec<f64>> = vec![vec![0.0; n_ch]; self.roles.len()];
                    for ch in 0..n_ch {
                        let monitor = &self.monitors[ch];
                        let mut gauss = Gaussian::new(self.key(index, step, ch).rng());
                        let _ = gauss.uniform();
                        let (bridge, total) = self.bridge(ch, &mut gauss);
                        let mean_o = monitor.mean(rho_o.matrix());
                        records[ch] = mean_o + total;
                        dw[ch] = total * dt / monitor.tau_m.sqrt();
                        for (k, role) in self.roles.iter().enumerate() {
                            if let AgentRole::Conditioned { effs, rungs, .. } = role {
                                let e = effs[ch];
                                let b = match rungs[ch] {
                                    Some(r) => bridge[r],
                                    None if e == 1.0 => total,
                                    None => continue,
                                };
                                // O's noise on the fraction-e record, then the
                                // agent's own innovation noise for it
                                let tau_e = monitor.tau_m / e;
                                let dw_e = (b / e) * dt / tau_e.sqrt();
                                let gap = monitor.mean(states[k].matrix()) - mean_o;
                                agent_noise[k][ch] = dw_e - gap * dt / tau_e.sqrt();
                            }
                        }
                    }
                    let next_o =
                        self.diffusive(&self.omniscient_generator, &rho_o, &vec![1.0; n_ch], &dw)?;
                    for (k, role) in self.roles.iter().enumerate() {
                        if let AgentRole::Conditioned {
                            effs, generator, ..
                        } = role
                        {
                            states[k] =
                                self.diffusive(generator, &states[k], effs, &agent_noise[k])?;
                        }
                    }
                    rho_o = next_o;
                }
            }
            let done = step + 1;
            if self.is_frame(done) {
                let idx = frames.len();
                frames.push(self.frame(done, idx, &rho_o, &states, dw, records));
            }
        }
        Ok(frames)
    }

    fn diffusive(
        &self,
        generator: &Generator,
        rho: &DensityOperator,
        effs: &[f64],
        noise: &[f64],
    ) -> Result<DensityOperator> {
        diffusive_step(generator, &self.monitors, &self.config, rho, effs, noise)
    }

    fn key(&self, index: u64, step: usize, channel: usize) -> NoiseKey {
        NoiseKey {
            seed: self.config.seed,
            trajectory: index,
            step: step as u64,
            channel: channel as u64,
        }
    }
}

/// Single realization with Kraus stepping, one frame per step.
pub fn run_trajectory(
    config: &SimulationConfig,
    initial: &DensityOperator,
    agents: &[AgentSpec],
) -> Result<Vec<TrajectoryFrame>> {
    TrajectoryRunner::new(
        config.clone(),
        initial.clone(),
        agents.to_vec(),
        StepperKind::Kraus,
        1,
    )?
    .run(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{purity, trace_distance};
    use crate::operators::{pauli_x, pauli_z, qubit_pure};
    use crate::sme::channel::MeasurementChannel;
    use crate::sme::generator::step_unconditioned;
    use crate::state::Observable;

    fn qubit_config(dt: f64, steps: usize, seed: u64) -> SimulationConfig {
        SimulationConfig::new(
            Observable::zero(2),
            vec![MeasurementChannel::new(pauli_z(), 1.0).unwrap()],
            dt,
            steps,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn blind_only_follows_lindblad() {
        let cfg = qubit_config(0.01, 50, 1);
        let rho0 = qubit_pure([1.0, 0.0, 0.0]).unwrap();
        let frames = run_trajectory(&cfg, &rho0, &[AgentSpec::Blind]).unwrap();
        let mut rho = rho0.clone();
        for f in &frames[1..] {
            rho = step_unconditioned(&rho, &cfg).unwrap();
            assert!((f.states[0].matrix() - rho.matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn initial_frame_is_shared() {
        let cfg = qubit_config(0.01, 10, 2);
        let rho0 = qubit_pure([1.0, 1.0, 0.0]).unwrap();
        let agents = [
            AgentSpec::Omniscient,
            AgentSpec::Blind,
            AgentSpec::Partial(0.5),
        ];
        let frames = run_trajectory(&cfg, &rho0, &agents).unwrap();
        assert_eq!(frames[0].t, 0.0);
        for s in &frames[0].states {
            assert_eq!(trace_distance(s, &frames[0].omniscient).unwrap(), 0.0);
        }
        assert!(frames.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn omniscient_stays_pure() {
        let cfg = SimulationConfig::new(
            pauli_x().scaled(0.5),
            vec![
                MeasurementChannel::new(pauli_z(), 1.0).unwrap(),
                MeasurementChannel::new(pauli_x(), 2.0).unwrap(),
            ],
            0.005,
            400,
            3,
        )
        .unwrap();
        let rho0 = qubit_pure([0.3, 0.2, 0.9]).unwrap();
        let frames = run_trajectory(&cfg, &rho0, &[AgentSpec::Omniscient]).unwrap();
        let last = frames.last().unwrap();
        assert!(purity(&last.omniscient) >= 1.0 - 1e-8);
    }

    #[test]
    fn blind_state_is_seed_independent() {
        let rho0 = qubit_pure([1.0, 0.0, 0.0]).unwrap();
        let agents = vec![AgentSpec::Blind, AgentSpec::Partial(0.4)];
        let a = TrajectoryRunner::new(
            qubit_config(0.01, 30, 1),
            rho0.clone(),
            agents.clone(),
            StepperKind::Kraus,
            5,
        )
        .unwrap()
        .run(0)
        .unwrap();
        let b = TrajectoryRunner::new(
            qubit_config(0.01, 30, 99),
            rho0,
            agents,
            StepperKind::Kraus,
            5,
        )
        .unwrap()
        .run(4)
        .unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.states[0], fb.states[0]);
        }
        assert_ne!(a.last().unwrap().states[1], b.last().unwrap().states[1]);
    }

    #[test]
    fn full_efficiency_agent_matches_omniscient_in_both_steppers() {
        let rho0 = qubit_pure([1.0, 0.0, 0.2]).unwrap();
        for kind in [StepperKind::Kraus, StepperKind::Diffusive] {
            let runner = TrajectoryRunner::new(
                qubit_config(0.001, 200, 5),
                rho0.clone(),
                vec![AgentSpec::Partial(1.0)],
                kind,
                50,
            )
            .unwrap();
            for f in runner.run(3).unwrap() {
                assert_eq!(f.states[0], f.omniscient);
            }
        }
    }

    #[test]
    fn frames_respect_stride() {
        let runner = TrajectoryRunner::new(
            qubit_config(0.01, 25, 0),
            qubit_pure([1.0, 0.0, 0.0]).unwrap(),
            vec![AgentSpec::Blind],
            StepperKind::Kraus,
            10,
        )
        .unwrap();
        assert_eq!(runner.frame_steps(), vec![0, 10, 20, 25]);
        let frames = runner.run(0).unwrap();
        let steps: Vec<usize> = frames.iter().map(|f| f.step).collect();
        assert_eq!(steps, runner.frame_steps());
    }

    #[test]
    fn physical_noise_statistics() {
        // dW implied by the Kraus readouts is a Wiener increment
        let dt = 0.001;
        let cfg = qubit_config(dt, 4000, 11);
        let rho0 = qubit_pure([1.0, 0.0, 0.0]).unwrap();
        let frames = run_trajectory(&cfg, &rho0, &[AgentSpec::Partial(0.5)]).unwrap();
        let dws: Vec<f64> = frames[1..].iter().map(|f| f.dw[0]).collect();
        let n = dws.len() as f64;
        let mean = dws.iter().sum::<f64>() / n;
        let var = dws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 5.0 * (dt / n).sqrt(), "mean {mean}");
        assert!((var - dt).abs() <= 5.0 * dt * (2.0 / n).sqrt(), "var {var}");
    }
}
