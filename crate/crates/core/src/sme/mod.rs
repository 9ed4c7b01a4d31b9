//! Stochastic master equation engine: channels, generators, steppers and
//! multi-agent trajectories.

mod channel;
mod generator;
mod noise;
mod steppers;
mod trajectory;

pub use channel::{
    split_times, AgentSpec, MeasurementChannel, SimulationConfig, DT_GUARD, RK4_STABILITY,
};
pub use generator::{innovation, lindblad_dissipator, step_unconditioned};
pub use noise::{consistent_noises, innovation_noise, Gaussian, NoiseKey};
pub use steppers::{step_conditioned_diffusive, step_conditioned_kraus, step_filtered};
pub use trajectory::{run_trajectory, StepperKind, TrajectoryFrame, TrajectoryRunner};
