//! Two or more agents, each reading only its own channel of a qubit, and
//! the triangle bounds on the distance between their descriptions.

use crate::ensemble::{run_ensemble_with_threads, EnsembleConfig, Metric, PairReport};
use crate::operators::{pauli_x, pauli_y, pauli_z, qubit_pure};
use crate::sme::{AgentSpec, MeasurementChannel, SimulationConfig};
use crate::state::Observable;

use super::config::{require, step_count};
use super::{
    invalid, Check, ExperimentError, MultiAgentConfig, Outcome, Recorder, RunOptions, Table,
};

pub const PAIR_COLUMNS: [&str; 7] = [
    "t",
    "mean_trace_dist",
    "se",
    "lower",
    "upper",
    "lower_ok",
    "upper_ok",
];

fn pauli(axis: &str) -> Option<Observable> {
    match axis {
        "x" => Some(pauli_x()),
        "y" => Some(pauli_y()),
        "z" => Some(pauli_z()),
        _ => None,
    }
}

fn build(cfg: &MultiAgentConfig) -> Result<EnsembleConfig, ExperimentError> {
    let k = cfg.channels.len();
    require(k >= 2, || {
        format!("multi-agent.channels has {k} entries; at least 2 are required")
    })?;
    require(cfg.tau_m.len() == k, || {
        format!(
            "multi-agent.tau_m has {} entries but channels has {k}",
            cfg.tau_m.len()
        )
    })?;
    let mut channels = Vec::with_capacity(k);
    for (i, (axis, &tau)) in cfg.channels.iter().zip(&cfg.tau_m).enumerate() {
        let obs = pauli(axis).ok_or_else(|| {
            ExperimentError::Config(format!(
                "multi-agent.channels[{i}] = {axis:?}; expected x, y or z"
            ))
        })?;
        channels.push(MeasurementChannel::new(obs, tau).map_err(invalid("multi-agent.tau_m"))?);
    }
    require(cfg.sample_stride > 0, || {
        "multi-agent.sample_stride must be positive".into()
    })?;
    require(cfg.n_trajectories >= 2, || {
        format!(
            "multi-agent.n_trajectories = {} must be at least 2",
            cfg.n_trajectories
        )
    })?;
    let n_steps = step_count("multi-agent", cfg.dt, cfg.t_final)?;
    let sim = SimulationConfig::new(Observable::zero(2), channels, cfg.dt, n_steps, cfg.seed)
        .map_err(invalid("multi-agent.dt"))?;
    let initial = qubit_pure(cfg.initial_bloch).map_err(invalid("multi-agent.initial_bloch"))?;
    let agents = (0..k)
        .map(|i| AgentSpec::PerChannel((0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()))
        .collect();
    let pairs = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .collect();
    let ens = EnsembleConfig::new(sim, initial, cfg.n_trajectories, agents)
        .with_metrics(vec![Metric::Purity])
        .with_stride(cfg.sample_stride)
        .with_stepper(cfg.stepper)
        .with_pairs(pairs);
    ens.validate().map_err(invalid("multi-agent"))?;
    Ok(ens)
}

fn pair_table(
    times: &[f64],
    p: &PairReport,
    lower_ok: &[bool],
    upper_ok: &[bool],
) -> Result<Table, ExperimentError> {
    let mut table = Table::new(&PAIR_COLUMNS);
    for (i, &t) in times.iter().enumerate() {
        table.push(vec![
            t,
            p.trace_distance.mean[i],
            p.trace_distance.std_error[i],
            p.lower[i],
            p.upper[i],
            f64::from(u8::from(lower_ok[i])),
            f64::from(u8::from(upper_ok[i])),
        ])?;
    }
    Ok(table)
}

/// Writes `multi_agent_<a>_<b>.csv` for every pair of channels and
/// `multi_agent_summary.json`.
pub fn cmd_multi_agent(
    cfg: &MultiAgentConfig,
    opts: &RunOptions,
) -> Result<Outcome, ExperimentError> {
    opts.validate()?;
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(n) = opts.trajectories {
        cfg.n_trajectories = n;
    }
    let ens = build(&cfg)?;
    let mut rec = Recorder::start(opts, "multi-agent")?;
    let report = run_ensemble_with_threads(&ens, opts.threads)?;
    let checks: Vec<Check> = report.bound_checks.iter().map(Check::from).collect();
    for (p, &(a, b)) in report.pairs.iter().zip(&ens.pairs) {
        let subject = format!("{}|{}", p.first, p.second);
        let flags = |bound: &str| -> Vec<bool> {
            report
                .bound_checks
                .iter()
                .filter(|c| c.subject == subject && c.bound == bound)
                .map(|c| c.satisfied)
                .collect()
        };
        let table = pair_table(
            &report.times,
            p,
            &flags("triangle_lower"),
            &flags("triangle_upper"),
        )?;
        rec.table(&format!("multi_agent_{a}_{b}.csv"), &table)?;
    }
    rec.finish(&cfg, Some(cfg.seed), Some(cfg.n_trajectories), checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agents_read_only_their_own_channel() {
        let cfg = MultiAgentConfig {
            channels: vec!["z".into(), "x".into(), "y".into()],
            tau_m: vec![1.0; 3],
            ..MultiAgentConfig::default()
        };
        let ens = build(&cfg).unwrap();
        assert_eq!(ens.agents[2], AgentSpec::PerChannel(vec![0.0, 0.0, 1.0]));
        assert_eq!(ens.pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn validation() {
        let bad = |f: fn(&mut MultiAgentConfig)| {
            let mut c = MultiAgentConfig::default();
            f(&mut c);
            build(&c).unwrap_err().to_string()
        };
        assert!(bad(|c| {
            c.channels = vec!["z".into()];
            c.tau_m = vec![1.0];
        })
        .contains("at least 2"));
        assert!(bad(|c| c.channels[1] = "w".into()).contains("channels[1]"));
        assert!(bad(|c| c.tau_m = vec![1.0]).contains("tau_m"));
        assert!(bad(|c| c.dt = 0.5).contains("multi-agent.dt"));
    }
}
