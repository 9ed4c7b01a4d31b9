//! Declarative experiment runners behind the `qpercept` binary.
//!
//! Each runner takes one section of a TOML [`ExperimentConfig`], validates it
//! before computing anything, writes CSV tables with a `#` schema header and
//! a JSON summary into the output directory, and returns an [`Outcome`]
//! whose checks decide the exit status. CSV contents depend only on the
//! configuration, never on thread count or wall time.

mod config;
mod jz;
mod multi_agent;
mod oscillator;
mod qubit;
mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

pub use config::{
    ExperimentConfig, JzConfig, MultiAgentConfig, OscillatorCurvesConfig, QubitVerifyConfig,
};
pub use jz::cmd_jz;
pub use multi_agent::cmd_multi_agent;
pub use oscillator::cmd_oscillator_curves;
pub use qubit::cmd_qubit_verify;
pub use table::{checks_csv, format_cell, Table};

use crate::ensemble::BoundCheck;

#[derive(Debug, Error)]
pub enum ExperimentError {
    /// Rejected before any computation; maps to exit code 2.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("output error: {0}")]
    Output(String),

    #[error(transparent)]
    Simulation(#[from] crate::Error),
}

impl ExperimentError {
    /// 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Prefixes a library error raised while validating `key`.
pub(crate) fn invalid(key: &str) -> impl Fn(crate::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Config(format!("{key}: {e}"))
}

/// Command-line overrides shared by every runner.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub trajectories: Option<usize>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_trajectories(mut self, n: usize) -> Self {
        self.trajectories = Some(n);
        self
    }

    pub(crate) fn validate(&self) -> Result<(), ExperimentError> {
        if self.threads == Some(0) {
            return Err(ExperimentError::Config(
                "--threads must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One verdict: `passed` iff lower ≤ value ≤ upper (missing ends are open).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub subject: String,
    pub time: Option<f64>,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn within(
        name: &str,
        subject: &str,
        time: Option<f64>,
        value: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        let passed = value.is_finite()
            && lower.is_none_or(|l| value >= l)
            && upper.is_none_or(|u| value <= u);
        Self {
            name: name.into(),
            subject: subject.into(),
            time,
            value,
            lower,
            upper,
            passed,
        }
    }
}

impl From<&BoundCheck> for Check {
    fn from(b: &BoundCheck) -> Self {
        Self {
            name: b.bound.clone(),
            subject: b.subject.clone(),
            time: Some(b.time),
            value: b.margin,
            lower: Some(-b.tolerance),
            upper: None,
            passed: b.satisfied,
        }
    }
}

/// What a runner produced.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        u8::from(!self.passed())
    }
}

#[derive(Serialize)]
struct Summary<'a, C: Serialize> {
    experiment: &'a str,
    config: &'a C,
    seed: Option<u64>,
    n_trajectories: Option<usize>,
    threads: Option<usize>,
    wall_time_seconds: f64,
    passed: bool,
    n_checks: usize,
    n_failed: usize,
    checks: &'a [Check],
    files: Vec<String>,
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    std::fs::write(path, contents).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn prepare_out_dir(dir: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Collects output files and writes the JSON sidecar last.
pub(crate) struct Recorder<'a> {
    opts: &'a RunOptions,
    experiment: &'static str,
    started: Instant,
    files: Vec<PathBuf>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn start(
        opts: &'a RunOptions,
        experiment: &'static str,
    ) -> Result<Self, ExperimentError> {
        prepare_out_dir(&opts.out_dir)?;
        Ok(Self {
            opts,
            experiment,
            started: Instant::now(),
            files: Vec::new(),
        })
    }

    pub(crate) fn path(&self, name: &str) -> PathBuf {
        self.opts.out_dir.join(name)
    }

    pub(crate) fn table(&mut self, name: &str, table: &Table) -> Result<(), ExperimentError> {
        let path = self.path(name);
        table.write_csv(&path)?;
        self.files.push(path);
        Ok(())
    }

    pub(crate) fn text(&mut self, name: &str, contents: &str) -> Result<(), ExperimentError> {
        let path = self.path(name);
        write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    pub(crate) fn finish<C: Serialize>(
        mut self,
        config: &C,
        seed: Option<u64>,
        n_trajectories: Option<usize>,
        checks: Vec<Check>,
    ) -> Result<Outcome, ExperimentError> {
        let summary_path = self.path(&format!(
            "{}_summary.json",
            self.experiment.replace('-', "_")
        ));
        let n_failed = checks.iter().filter(|c| !c.passed).count();
        let summary = Summary {
            experiment: self.experiment,
            config,
            seed,
            n_trajectories,
            threads: self.opts.threads,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            passed: n_failed == 0,
            n_checks: checks.len(),
            n_failed,
            checks: &checks,
            files: self.files.iter().map(|p| p.display().to_string()).collect(),
        };
        let json = serde_json::to_string_pretty(&summary)
            .map_err(|e| ExperimentError::Output(e.to_string()))?;
        write_file(&summary_path, &json)?;
        self.files.push(summary_path);
        Ok(Outcome {
            experiment: self.experiment.into(),
            checks,
            files: self.files,
        })
    }
}
