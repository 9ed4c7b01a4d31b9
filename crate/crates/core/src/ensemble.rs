//! Ensembles of trajectories: per-trajectory metrics, aggregation with
//! standard errors, and statistical checks of the analytic bounds.
//!
//! Trajectories run in parallel on the current rayon pool. Results are
//! collected in trajectory order and reduced sequentially, so a report is
//! bit-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{MetricSeries, BOUND_SLACK};
use crate::error::{check_dim, Error, Result};
use crate::metrics::{
    entropy_of_spectrum, purity, relative_entropy_pure_with, surprise_second_moment_of_spectrum,
    trace_distance,
};
use crate::sme::{AgentSpec, SimulationConfig, StepperKind, TrajectoryRunner};
use crate::state::{DensityOperator, SpectralDecomposition};

/// Standard errors allowed for checks on means.
pub const MEAN_SIGMAS: f64 = 3.0;
/// Standard errors allowed for checks on variances.
pub const VARIANCE_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TraceDistance,
    RelativeEntropy,
    Purity,
    Entropy,
    /// Bound columns and bound checks; implies the distance metrics.
    Bounds,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::TraceDistance,
        Metric::RelativeEntropy,
        Metric::Purity,
        Metric::Entropy,
        Metric::Bounds,
    ];
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub sim: SimulationConfig,
    pub initial: DensityOperator,
    pub n_trajectories: usize,
    pub agents: Vec<AgentSpec>,
    pub metrics: Vec<Metric>,
    pub sample_stride: usize,
    pub stepper: StepperKind,
    /// Agent index pairs whose mutual trace distance is tracked.
    pub pairs: Vec<(usize, usize)>,
    /// Keep raw per-trajectory samples in every series.
    pub keep_samples: bool,
}

impl EnsembleConfig {
    /// All metrics, every step sampled, Kraus stepping, no pairs.
    pub fn new(
        sim: SimulationConfig,
        initial: DensityOperator,
        n_trajectories: usize,
        agents: Vec<AgentSpec>,
    ) -> Self {
        Self {
            sim,
            initial,
            n_trajectories,
            agents,
            metrics: Metric::ALL.to_vec(),
            sample_stride: 1,
            stepper: StepperKind::Kraus,
            pairs: Vec::new(),
            keep_samples: false,
        }
    }

    pub fn with_metrics(mut self, metrics: Vec<Metric>) -> Self {
        self.metrics = metrics;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_stepper(mut self, stepper: StepperKind) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn with_pairs(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.pairs = pairs;
        self
    }

    pub fn with_samples(mut self, keep: bool) -> Self {
        self.keep_samples = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        check_dim(self.sim.dim(), self.initial.dim())?;
        if self.n_trajectories < 2 {
            return Err(Error::OutOfRange(format!(
                "n_trajectories = {} (need at least 2 for standard errors)",
                self.n_trajectories
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::OutOfRange("sample_stride must be positive".into()));
        }
        if self.agents.is_empty() {
            return Err(Error::Config("at least one agent is required".into()));
        }
        for &(a, b) in &self.pairs {
            if a >= self.agents.len() || b >= self.agents.len() {
                return Err(Error::OutOfRange(format!(
                    "agent pair ({a}, {b}) out of range"
                )));
            }
        }
        Ok(())
    }

    fn wants(&self, m: Metric) -> bool {
        self.metrics.contains(&m)
            || (self.metrics.contains(&Metric::Bounds)
                && matches!(m, Metric::TraceDistance | Metric::RelativeEntropy))
    }
}

/// Mean bound columns for one agent plus the paired margins used to check
/// them. Each margin is formed per trajectory, so correlations between the
/// simulated metric and the agent's own bound cancel in the standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentBounds {
    /// ⟨1 - 𝒫⟩.
    pub td_lower: Vec<f64>,
    /// ⟨√(1 - 𝒫)⟩.
    pub td_upper: Vec<f64>,
    /// 𝒫̄ - 𝒫̄² with 𝒫̄ the mean agent purity.
    pub td_var_bound: Vec<f64>,
    /// ⟨tr ρ log²ρ⟩ - ⟨S⟩².
    pub re_var_bound: Vec<f64>,
    /// 𝒯 - (1 - 𝒫) per trajectory.
    pub lower_margin: MetricSeries,
    /// √(1 - 𝒫) - 𝒯 per trajectory.
    pub upper_margin: MetricSeries,
    /// S(ρ_O‖ρ) - S(ρ) per trajectory.
    pub entropy_gap: MetricSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentReport {
    pub label: String,
    pub trace_distance: Option<MetricSeries>,
    pub relative_entropy: Option<MetricSeries>,
    /// Relative-entropy samples that were +∞ and left out, per time.
    pub infinite_relative_entropy: Vec<usize>,
    pub purity: Option<MetricSeries>,
    pub entropy: Option<MetricSeries>,
    pub bounds: Option<AgentBounds>,
}

/// Trace distance between two agents with the triangle bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub first: String,
    pub second: String,
    pub trace_distance: MetricSeries,
    /// ⟨|𝒫_A - 𝒫_B|⟩.
    pub lower: Vec<f64>,
    /// ⟨√(1 - 𝒫_A) + √(1 - 𝒫_B)⟩.
    pub upper: Vec<f64>,
    /// 𝒯(ρ_A, ρ_B) - |𝒫_A - 𝒫_B| per trajectory.
    pub lower_margin: MetricSeries,
    /// √(1 - 𝒫_A) + √(1 - 𝒫_B) - 𝒯(ρ_A, ρ_B) per trajectory.
    pub upper_margin: MetricSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub time: f64,
    pub subject: String,
    pub bound: String,
    pub satisfied: bool,
    /// Signed clearance of the statistic from the bound; negative values
    /// are tolerated down to `-tolerance`.
    pub margin: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub times: Vec<f64>,
    pub n_trajectories: usize,
    pub agents: Vec<AgentReport>,
    pub pairs: Vec<PairReport>,
    pub bound_checks: Vec<BoundCheck>,
}

impl EnsembleReport {
    pub fn all_satisfied(&self) -> bool {
        self.bound_checks.iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.bound_checks.iter().filter(|c| !c.satisfied)
    }

    pub fn agent(&self, label: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.label == label)
    }
}

/// Pointwise mean, unbiased variance and standard errors over trajectories.
/// Non-finite samples are skipped and reflected in `count`.
pub fn aggregate(times: &[f64], samples: &[Vec<f64>], keep_samples: bool) -> Result<MetricSeries> {
    if samples.len() < 2 {
        return Err(Error::OutOfRange(format!(
            "aggregation needs at least 2 trajectories, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|s| s.len() != times.len()) {
        return Err(Error::MisalignedGrids);
    }
    let nt = times.len();
    let mut series = MetricSeries {
        times: times.to_vec(),
        mean: Vec::with_capacity(nt),
        variance: Vec::with_capacity(nt),
        std_error: Vec::with_capacity(nt),
        variance_std_error: Vec::with_capacity(nt),
        count: Vec::with_capacity(nt),
        per_trajectory: keep_samples.then(|| samples.to_vec()),
    };
    for i in 0..nt {
        let xs: Vec<f64> = samples
            .iter()
            .map(|s| s[i])
            .filter(|x| x.is_finite())
            .collect();
        let n = xs.len();
        let (mean, var, se, var_se) = match n {
            0 => (f64::INFINITY, 0.0, 0.0, 0.0),
            1 => (xs[0], 0.0, 0.0, 0.0),
            _ => {
                let nf = n as f64;
                let mean = xs.iter().sum::<f64>() / nf;
                let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
                let m2 = ss / nf;
                let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
                let var = ss / (nf - 1.0);
                (
                    mean,
                    var,
                    (var / nf).sqrt(),
                    ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
                )
            }
        };
        series.mean.push(mean);
        series.variance.push(var);
        series.std_error.push(se);
        series.variance_std_error.push(var_se);
        series.count.push(n);
    }
    Ok(series)
}

/// Scalars computed from one agent's state at one frame.
#[derive(Debug, Clone, Copy, Default)]
struct StateScalars {
    purity: f64,
    entropy: f64,
    surprise_sq: f64,
}

impl StateScalars {
    fn of(rho: &DensityOperator, spec: &SpectralDecomposition) -> Self {
        Self {
            purity: purity(rho),
            entropy: entropy_of_spectrum(spec),
            surprise_sq: surprise_second_moment_of_spectrum(spec),
        }
    }
}

/// Per-trajectory samples, indexed `[agent][time]` and `[pair][time]`.
#[derive(Debug, Clone, Default)]
struct TrajectorySamples {
    td: Vec<Vec<f64>>,
    re: Vec<Vec<f64>>,
    scalars: Vec<Vec<StateScalars>>,
    pair_td: Vec<Vec<f64>>,
}

/// Cached spectra of the blind path, shared across trajectories.
struct BlindCache {
    spectra: Vec<SpectralDecomposition>,
    scalars: Vec<StateScalars>,
}

fn run_one(
    cfg: &EnsembleConfig,
    runner: &TrajectoryRunner,
    blind: Option<&BlindCache>,
    blind_agents: &[bool],
    index: u64,
) -> Result<TrajectorySamples> {
    let frames = runner.run(index)?;
    let na = cfg.agents.len();
    let nt = frames.len();
    let want_td = cfg.wants(Metric::TraceDistance);
    let want_re = cfg.wants(Metric::RelativeEntropy);
    let mut out = TrajectorySamples {
        td: vec![Vec::with_capacity(nt); na],
        re: vec![Vec::with_capacity(nt); na],
        scalars: vec![Vec::with_capacity(nt); na],
        pair_td: vec![Vec::with_capacity(nt); cfg.pairs.len()],
    };
    for (k, frame) in frames.iter().enumerate() {
        for (j, rho) in frame.states.iter().enumerate() {
            let owned;
            let (spec, scalars) = match blind.filter(|_| blind_agents[j]) {
                Some(cache) => (&cache.spectra[k], cache.scalars[k]),
                None => {
                    owned = rho.spectrum();
                    let s = StateScalars::of(rho, &owned);
                    (&owned, s)
                }
            };
            out.scalars[j].push(scalars);
            if want_td {
                out.td[j].push(trace_distance(&frame.omniscient, rho)?);
            }
            if want_re {
                out.re[j].push(relative_entropy_pure_with(&frame.omniscient, spec)?);
            }
        }
        for (p, &(a, b)) in cfg.pairs.iter().enumerate() {
            out.pair_td[p].push(trace_distance(&frame.states[a], &frame.states[b])?);
        }
    }
    Ok(out)
}

fn column<T: Copy>(
    per_traj: &[TrajectorySamples],
    f: impl Fn(&TrajectorySamples) -> &Vec<T>,
) -> Vec<Vec<T>> {
    per_traj.iter().map(|s| f(s).clone()).collect()
}

fn map2(a: &[Vec<f64>], b: &[Vec<f64>], f: impl Fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| f(u, v)).collect())
        .collect()
}

fn mean_column(rows: &[Vec<f64>], i: usize) -> f64 {
    rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64
}

/// Runs the ensemble on the current rayon pool.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    cfg.validate()?;
    let runner = TrajectoryRunner::new(
        cfg.sim.clone(),
        cfg.initial.clone(),
        cfg.agents.clone(),
        cfg.stepper,
        cfg.sample_stride,
    )?;
    let times: Vec<f64> = runner
        .frame_steps()
        .iter()
        .map(|&s| s as f64 * cfg.sim.dt)
        .collect();
    let blind_agents: Vec<bool> = cfg
        .agents
        .iter()
        .map(|a| {
            a.efficiencies(&cfg.sim.channels)
                .map(|e| e.iter().all(|&x| x == 0.0))
        })
        .collect::<Result<_>>()?;
    let blind = runner.blind_frames().map(|frames| {
        let spectra: Vec<SpectralDecomposition> = frames.iter().map(|r| r.spectrum()).collect();
        let scalars = frames
            .iter()
            .zip(&spectra)
            .map(|(r, s)| StateScalars::of(r, s))
            .collect();
        BlindCache { spectra, scalars }
    });

    let per_traj: Vec<TrajectorySamples> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|i| run_one(cfg, &runner, blind.as_ref(), &blind_agents, i))
        .collect::<Result<_>>()?;

    let keep = cfg.keep_samples;
    let mut agents = Vec::with_capacity(cfg.agents.len());
    let mut checks = Vec::new();
    for (j, spec) in cfg.agents.iter().enumerate() {
        let label = spec.label();
        let scalars = column(&per_traj, |s| &s.scalars[j]);
        let pick = |f: fn(&StateScalars) -> f64| -> Vec<Vec<f64>> {
            scalars
                .iter()
                .map(|row| row.iter().map(f).collect())
                .collect()
        };
        let purities = pick(|s| s.purity);
        let entropies = pick(|s| s.entropy);
        let surprises = pick(|s| s.surprise_sq);
        let td = cfg
            .wants(Metric::TraceDistance)
            .then(|| column(&per_traj, |s| &s.td[j]));
        let re = cfg
            .wants(Metric::RelativeEntropy)
            .then(|| column(&per_traj, |s| &s.re[j]));
        let infinite_relative_entropy = match &re {
            Some(rows) => (0..times.len())
                .map(|i| rows.iter().filter(|r| r[i] == f64::INFINITY).count())
                .collect(),
            None => vec![0; times.len()],
        };

        let bounds = match (&td, &re, cfg.metrics.contains(&Metric::Bounds)) {
            (Some(td), Some(re), true) => {
                let nt = times.len();
                let td_lower: Vec<f64> = (0..nt)
                    .map(|i| {
                        purities.iter().map(|r| (1.0 - r[i]).max(0.0)).sum::<f64>()
                            / purities.len() as f64
                    })
                    .collect();
                let td_upper: Vec<f64> = (0..nt)
                    .map(|i| {
                        purities
                            .iter()
                            .map(|r| (1.0 - r[i]).max(0.0).sqrt())
                            .sum::<f64>()
                            / purities.len() as f64
                    })
                    .collect();
                let td_var_bound: Vec<f64> = (0..nt)
                    .map(|i| {
                        let p = mean_column(&purities, i);
                        p - p * p
                    })
                    .collect();
                let re_var_bound: Vec<f64> = (0..nt)
                    .map(|i| {
                        let s = mean_column(&entropies, i);
                        mean_column(&surprises, i) - s * s
                    })
                    .collect();
                let lower_margin = aggregate(
                    &times,
                    &map2(td, &purities, |t, p| t - (1.0 - p).max(0.0)),
                    keep,
                )?;
                let upper_margin = aggregate(
                    &times,
                    &map2(td, &purities, |t, p| (1.0 - p).max(0.0).sqrt() - t),
                    keep,
                )?;
                let entropy_gap = aggregate(&times, &map2(re, &entropies, |r, s| r - s), keep)?;
                Some(AgentBounds {
                    td_lower,
                    td_upper,
                    td_var_bound,
                    re_var_bound,
                    lower_margin,
                    upper_margin,
                    entropy_gap,
                })
            }
            _ => None,
        };
        let report = AgentReport {
            label,
            trace_distance: td
                .as_ref()
                .map(|rows| aggregate(&times, rows, keep))
                .transpose()?,
            relative_entropy: re
                .as_ref()
                .map(|rows| aggregate(&times, rows, keep))
                .transpose()?,
            infinite_relative_entropy,
            purity: cfg
                .metrics
                .contains(&Metric::Purity)
                .then(|| aggregate(&times, &purities, keep))
                .transpose()?,
            entropy: cfg
                .metrics
                .contains(&Metric::Entropy)
                .then(|| aggregate(&times, &entropies, keep))
                .transpose()?,
            bounds,
        };
        checks.extend(agent_checks(&report));
        agents.push(report);
    }

    let mut pairs = Vec::with_capacity(cfg.pairs.len());
    for (p, &(a, b)) in cfg.pairs.iter().enumerate() {
        let td = column(&per_traj, |s| &s.pair_td[p]);
        let pa: Vec<Vec<f64>> = column(&per_traj, |s| &s.scalars[a])
            .iter()
            .map(|r| r.iter().map(|s| s.purity).collect())
            .collect();
        let pb: Vec<Vec<f64>> = column(&per_traj, |s| &s.scalars[b])
            .iter()
            .map(|r| r.iter().map(|s| s.purity).collect())
            .collect();
        let lower_rows = map2(&pa, &pb, |x, y| (x - y).abs());
        let upper_rows = map2(&pa, &pb, |x, y| {
            (1.0 - x).max(0.0).sqrt() + (1.0 - y).max(0.0).sqrt()
        });
        let report = PairReport {
            first: cfg.agents[a].label(),
            second: cfg.agents[b].label(),
            trace_distance: aggregate(&times, &td, keep)?,
            lower: (0..times.len())
                .map(|i| mean_column(&lower_rows, i))
                .collect(),
            upper: (0..times.len())
                .map(|i| mean_column(&upper_rows, i))
                .collect(),
            lower_margin: aggregate(&times, &map2(&td, &lower_rows, |t, l| t - l), keep)?,
            upper_margin: aggregate(&times, &map2(&upper_rows, &td, |u, t| u - t), keep)?,
        };
        checks.extend(pair_checks(&report));
        pairs.push(report);
    }

    Ok(EnsembleReport {
        times,
        n_trajectories: cfg.n_trajectories,
        agents,
        pairs,
        bound_checks: checks,
    })
}

/// Runs the ensemble on a dedicated pool of `threads` workers (all cores when
/// `None`). The result does not depend on the thread count.
pub fn run_ensemble_with_threads(
    cfg: &EnsembleConfig,
    threads: Option<usize>,
) -> Result<EnsembleReport> {
    with_threads(threads, || run_ensemble(cfg))?
}

/// Runs `f` on a dedicated rayon pool of `threads` workers (all cores when
/// `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// One check per time: the mean of a per-trajectory margin is ≥ -k·SE.
fn margin_checks(subject: &str, bound: &str, s: &MetricSeries) -> Vec<BoundCheck> {
    (0..s.len())
        .map(|i| {
            let tolerance = MEAN_SIGMAS * s.std_error[i] + BOUND_SLACK;
            BoundCheck {
                time: s.times[i],
                subject: subject.to_string(),
                bound: bound.to_string(),
                satisfied: s.mean[i] >= -tolerance,
                margin: s.mean[i],
                tolerance,
            }
        })
        .collect()
}

fn agent_checks(report: &AgentReport) -> Vec<BoundCheck> {
    let Some(b) = &report.bounds else {
        return Vec::new();
    };
    let subject = report.label.as_str();
    let mut out = margin_checks(subject, "purity_sandwich_lower", &b.lower_margin);
    out.extend(margin_checks(
        subject,
        "purity_sandwich_upper",
        &b.upper_margin,
    ));
    let g = &b.entropy_gap;
    for i in 0..g.len() {
        let tolerance = MEAN_SIGMAS * g.std_error[i] + BOUND_SLACK;
        out.push(BoundCheck {
            time: g.times[i],
            subject: subject.to_string(),
            bound: "entropy_identity".into(),
            satisfied: g.mean[i].abs() <= tolerance,
            margin: -g.mean[i].abs(),
            tolerance,
        });
    }
    let variance_check = |name: &str, s: &MetricSeries, bound: &[f64]| -> Vec<BoundCheck> {
        (0..s.len())
            .map(|i| {
                let tolerance = VARIANCE_SIGMAS * s.variance_std_error[i] + BOUND_SLACK;
                let margin = bound[i] - s.variance[i];
                BoundCheck {
                    time: s.times[i],
                    subject: subject.to_string(),
                    bound: name.to_string(),
                    satisfied: margin >= -tolerance,
                    margin,
                    tolerance,
                }
            })
            .collect()
    };
    if let Some(td) = &report.trace_distance {
        out.extend(variance_check(
            "trace_distance_variance",
            td,
            &b.td_var_bound,
        ));
    }
    if let Some(re) = &report.relative_entropy {
        out.extend(variance_check(
            "relative_entropy_variance",
            re,
            &b.re_var_bound,
        ));
    }
    out
}

fn pair_checks(report: &PairReport) -> Vec<BoundCheck> {
    let subject = format!("{}|{}", report.first, report.second);
    let mut out = margin_checks(&subject, "triangle_lower", &report.lower_margin);
    out.extend(margin_checks(
        &subject,
        "triangle_upper",
        &report.upper_margin,
    ));
    out
}
