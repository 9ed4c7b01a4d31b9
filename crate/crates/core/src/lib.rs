//! Quantum trajectories of a continuously monitored system as described by
//! agents with different access to the measurement record.
//!
//! An omniscient agent conditions on every record and holds the complete
//! description ρ_O; a blind agent conditions on nothing and follows the
//! Lindblad evolution; partial agents see a fraction η of each channel. The
//! crate simulates all of them on one shared physical realization and
//! compares the simulated distances between their states with bounds each
//! agent can compute from its own state alone.
//!
//! - [`state`], [`metrics`], [`operators`]: density operators, observables,
//!   purity, entropies, trace distance, relative entropy.
//! - [`sme`]: stochastic master equation steppers and the multi-agent
//!   trajectory runner.
//! - [`bounds`]: purity sandwich, entropy identity, variance bounds,
//!   short-time and observable bounds.
//! - [`gaussian`]: moment equations of the position-monitored oscillator.
//! - [`ensemble`]: parallel ensembles with standard errors and bound checks.
//! - [`experiments`]: config-driven runners behind the `qpercept` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod metrics;
pub mod operators;
pub mod sme;
pub mod state;

pub use ensemble::{run_ensemble, EnsembleConfig, EnsembleReport};
pub use error::{Error, Result};
pub use sme::{AgentSpec, MeasurementChannel, SimulationConfig, StepperKind, TrajectoryRunner};
pub use state::{DensityOperator, Observable};
