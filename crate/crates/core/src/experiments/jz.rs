//! Relative entropy between the complete description and agents of several
//! efficiencies, for a spin monitored through J_z.

use crate::ensemble::{run_ensemble_with_threads, AgentReport, EnsembleConfig, MEAN_SIGMAS};
use crate::operators::{gaussian_level_state, jz, jz_levels};
use crate::sme::{AgentSpec, MeasurementChannel, SimulationConfig};
use crate::state::Observable;

use super::config::{require, step_count};
use super::{invalid, Check, ExperimentError, JzConfig, Outcome, Recorder, RunOptions, Table};

pub const JZ_COLUMNS: [&str; 10] = [
    "t",
    "mean_rel_entropy",
    "se",
    "entropy_rhs",
    "mean_trace_dist",
    "td_lower",
    "td_upper",
    "td_var_bound",
    "re_var_bound",
    "n_infinite",
];

fn agent_for(eta: f64) -> AgentSpec {
    if eta == 0.0 {
        AgentSpec::Blind
    } else if eta == 1.0 {
        AgentSpec::Omniscient
    } else {
        AgentSpec::Partial(eta)
    }
}

fn build(cfg: &JzConfig) -> Result<EnsembleConfig, ExperimentError> {
    require(cfg.levels >= 2, || {
        format!("jz.levels = {} must be at least 2", cfg.levels)
    })?;
    require(!cfg.etas.is_empty(), || "jz.etas must not be empty".into())?;
    for (i, &e) in cfg.etas.iter().enumerate() {
        require((0.0..=1.0).contains(&e), || {
            format!("jz.etas[{i}] = {e} outside [0, 1]")
        })?;
        require(!cfg.etas[..i].contains(&e), || {
            format!("jz.etas[{i}] = {e} is repeated")
        })?;
    }
    require(cfg.sample_stride > 0, || {
        "jz.sample_stride must be positive".into()
    })?;
    require(cfg.n_trajectories >= 2, || {
        format!(
            "jz.n_trajectories = {} must be at least 2",
            cfg.n_trajectories
        )
    })?;
    let n_steps = step_count("jz", cfg.dt, cfg.t_final)?;
    let channel =
        MeasurementChannel::new(jz(cfg.levels), cfg.tau_m).map_err(invalid("jz.tau_m"))?;
    let sim = SimulationConfig::new(
        Observable::zero(cfg.levels),
        vec![channel],
        cfg.dt,
        n_steps,
        cfg.seed,
    )
    .map_err(invalid("jz.dt"))?;
    let std_dev = cfg.initial_std.unwrap_or((cfg.levels as f64 / 4.0).sqrt());
    let initial = gaussian_level_state(&jz_levels(cfg.levels), cfg.initial_mean, std_dev)
        .map_err(invalid("jz.initial_std"))?;
    let ens = EnsembleConfig::new(
        sim,
        initial,
        cfg.n_trajectories,
        cfg.etas.iter().map(|&e| agent_for(e)).collect(),
    )
    .with_stride(cfg.sample_stride)
    .with_stepper(cfg.stepper)
    .with_samples(cfg.per_trajectory);
    ens.validate().map_err(invalid("jz"))?;
    Ok(ens)
}

fn agent_table(times: &[f64], a: &AgentReport) -> Result<Table, ExperimentError> {
    let missing = || ExperimentError::Output(format!("agent {} lacks metric series", a.label));
    let re = a.relative_entropy.as_ref().ok_or_else(missing)?;
    let td = a.trace_distance.as_ref().ok_or_else(missing)?;
    let entropy = a.entropy.as_ref().ok_or_else(missing)?;
    let b = a.bounds.as_ref().ok_or_else(missing)?;
    let mut table = Table::new(&JZ_COLUMNS).allow_infinite("mean_rel_entropy");
    for (i, &t) in times.iter().enumerate() {
        let n_inf = a.infinite_relative_entropy[i];
        let mean_re = if n_inf > 0 { f64::INFINITY } else { re.mean[i] };
        table.push(vec![
            t,
            mean_re,
            re.std_error[i],
            entropy.mean[i],
            td.mean[i],
            b.td_lower[i],
            b.td_upper[i],
            b.td_var_bound[i],
            b.re_var_bound[i],
            n_inf as f64,
        ])?;
    }
    Ok(table)
}

fn samples_table(times: &[f64], a: &AgentReport) -> Result<Table, ExperimentError> {
    let missing = || ExperimentError::Output(format!("agent {} kept no samples", a.label));
    let re = a
        .relative_entropy
        .as_ref()
        .and_then(|s| s.per_trajectory.as_ref())
        .ok_or_else(missing)?;
    let td = a
        .trace_distance
        .as_ref()
        .and_then(|s| s.per_trajectory.as_ref())
        .ok_or_else(missing)?;
    let mut table =
        Table::new(&["trajectory", "t", "rel_entropy", "trace_dist"]).allow_infinite("rel_entropy");
    for (k, (re_row, td_row)) in re.iter().zip(td).enumerate() {
        for (i, &t) in times.iter().enumerate() {
            table.push(vec![k as f64, t, re_row[i], td_row[i]])?;
        }
    }
    Ok(table)
}

/// Higher efficiency never leaves the agent further from the complete
/// description: ⟨S⟩(η_lo) - ⟨S⟩(η_hi) ≥ -3·SE at every time.
fn ordering_checks(times: &[f64], etas: &[f64], agents: &[AgentReport]) -> Vec<Check> {
    let mut order: Vec<usize> = (0..etas.len()).collect();
    order.sort_by(|&a, &b| etas[a].total_cmp(&etas[b]));
    let mut out = Vec::new();
    for w in order.windows(2) {
        let (lo, hi) = (&agents[w[0]], &agents[w[1]]);
        let (Some(a), Some(b)) = (&lo.relative_entropy, &hi.relative_entropy) else {
            continue;
        };
        for (i, &t) in times.iter().enumerate() {
            if lo.infinite_relative_entropy[i] > 0 {
                continue;
            }
            let se = a.std_error[i].hypot(b.std_error[i]);
            let diff = if hi.infinite_relative_entropy[i] > 0 {
                f64::NEG_INFINITY
            } else {
                a.mean[i] - b.mean[i]
            };
            out.push(Check::within(
                "entropy_ordering",
                &format!("{}>={}", lo.label, hi.label),
                Some(t),
                diff,
                Some(-MEAN_SIGMAS * se - 1e-12),
                None,
            ));
        }
    }
    out
}

/// Runs the J_z ensemble and writes `jz_eta_<η>.csv` per efficiency (plus
/// `jz_eta_<η>_samples.csv` when requested) and `jz_summary.json`.
pub fn cmd_jz(cfg: &JzConfig, opts: &RunOptions) -> Result<Outcome, ExperimentError> {
    opts.validate()?;
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(n) = opts.trajectories {
        cfg.n_trajectories = n;
    }
    let ens = build(&cfg)?;
    let mut rec = Recorder::start(opts, "jz")?;
    let report = run_ensemble_with_threads(&ens, opts.threads)?;

    let mut checks: Vec<Check> = report.bound_checks.iter().map(Check::from).collect();
    checks.extend(ordering_checks(&report.times, &cfg.etas, &report.agents));
    for (eta, agent) in cfg.etas.iter().zip(&report.agents) {
        rec.table(
            &format!("jz_eta_{eta}.csv"),
            &agent_table(&report.times, agent)?,
        )?;
        if cfg.per_trajectory {
            rec.table(
                &format!("jz_eta_{eta}_samples.csv"),
                &samples_table(&report.times, agent)?,
            )?;
        }
    }
    rec.finish(&cfg, Some(cfg.seed), Some(cfg.n_trajectories), checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agents_from_efficiencies() {
        assert_eq!(agent_for(0.0), AgentSpec::Blind);
        assert_eq!(agent_for(1.0), AgentSpec::Omniscient);
        assert_eq!(agent_for(0.5), AgentSpec::Partial(0.5));
    }

    #[test]
    fn validation_names_the_key() {
        let bad = |f: fn(&mut JzConfig)| {
            let mut c = JzConfig::default();
            f(&mut c);
            build(&c).unwrap_err().to_string()
        };
        assert!(bad(|c| c.etas = vec![0.0, 1.5]).contains("jz.etas[1]"));
        assert!(bad(|c| c.etas = vec![0.5, 0.5]).contains("repeated"));
        assert!(bad(|c| c.dt = 0.05).contains("jz.dt"));
        assert!(bad(|c| c.t_final = 4.001).contains("multiple"));
        assert!(bad(|c| c.levels = 1).contains("jz.levels"));
        assert!(bad(|c| c.tau_m = -1.0).contains("jz.tau_m"));
        assert!(bad(|c| c.n_trajectories = 1).contains("n_trajectories"));
        assert!(build(&JzConfig::default()).is_ok());
    }
}
