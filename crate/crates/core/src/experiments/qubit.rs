//! Regression suite for a σ_z-monitored qubit against closed forms.

use rayon::prelude::*;

use crate::bounds::{commutator_rate_identity, decoherence_rate};
use crate::ensemble::{aggregate, run_ensemble, with_threads, EnsembleConfig, Metric, MEAN_SIGMAS};
use crate::metrics::purity;
use crate::operators::{pauli_z, qubit_mixed, qubit_pure};
use crate::sme::{
    step_unconditioned, AgentSpec, MeasurementChannel, SimulationConfig, StepperKind,
    TrajectoryRunner,
};
use crate::state::{DensityOperator, Observable};

use super::config::require;
use super::{
    checks_csv, invalid, Check, ExperimentError, Outcome, QubitVerifyConfig, Recorder, RunOptions,
};

/// Accepted range for the ratio of identity residuals at dt and dt/2, which
/// is 4 for a second-order quadrature.
pub const HALVING_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
/// Short-time window factors: ⟨𝒯⟩ ∈ [0.8·T/τ_D, 1.2·√(T/τ_D)].
pub const SHORT_TIME_FACTORS: (f64, f64) = (0.8, 1.2);

fn sim(
    cfg: &QubitVerifyConfig,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<SimulationConfig, ExperimentError> {
    let ch =
        MeasurementChannel::new(pauli_z(), cfg.tau_m).map_err(invalid("qubit-verify.tau_m"))?;
    SimulationConfig::new(Observable::zero(2), vec![ch], dt, n_steps, seed)
        .map_err(invalid("qubit-verify.dt"))
}

fn steps_for(key: &str, t: f64, dt: f64) -> Result<usize, ExperimentError> {
    let n = (t / dt).round();
    require(t >= 0.0 && (n * dt - t).abs() <= 1e-9 * t.max(1.0), || {
        format!("qubit-verify.{key} = {t} is not a non-negative multiple of dt = {dt}")
    })?;
    Ok(n as usize)
}

fn plus() -> DensityOperator {
    qubit_pure([1.0, 0.0, 0.0]).expect("valid Bloch vector")
}

fn unconditioned_series(
    cfg: &SimulationConfig,
    n: usize,
) -> Result<Vec<DensityOperator>, ExperimentError> {
    let mut series = Vec::with_capacity(n + 1);
    let mut rho = plus();
    series.push(rho.clone());
    for _ in 0..n {
        rho = step_unconditioned(&rho, cfg)?;
        series.push(rho.clone());
    }
    Ok(series)
}

struct Plan {
    coherence_steps: Vec<usize>,
    coherence: SimulationConfig,
    short: SimulationConfig,
    short_ratio: f64,
    identity_steps: usize,
    identity: SimulationConfig,
    identity_half: SimulationConfig,
    kraus: SimulationConfig,
    diffusive: SimulationConfig,
    stepper_initial: DensityOperator,
}

fn plan(cfg: &QubitVerifyConfig) -> Result<Plan, ExperimentError> {
    require(cfg.tau_m > 0.0, || {
        format!("qubit-verify.tau_m = {} must be positive", cfg.tau_m)
    })?;
    require(cfg.n_trajectories >= 2, || {
        format!(
            "qubit-verify.n_trajectories = {} must be at least 2",
            cfg.n_trajectories
        )
    })?;
    require(cfg.stepper_steps > 0, || {
        "qubit-verify.stepper_steps must be positive".into()
    })?;
    require(
        cfg.short_time_fraction > 0.0 && cfg.short_time_fraction <= 1.0,
        || {
            format!(
                "qubit-verify.short_time_fraction = {} outside (0, 1]",
                cfg.short_time_fraction
            )
        },
    )?;
    let dt = cfg.dt;
    let base = sim(cfg, dt, 1, cfg.seed)?;
    let coherence_steps = cfg
        .coherence_times
        .iter()
        .map(|&t| steps_for("coherence_times", t, dt))
        .collect::<Result<Vec<_>, _>>()?;
    let max_steps = coherence_steps.iter().copied().max().unwrap_or(0);

    let tau_d = 1.0 / decoherence_rate(&plus(), &base.channels)?;
    let short_steps = ((cfg.short_time_fraction * tau_d / dt).round() as usize).max(1);
    let short_ratio = short_steps as f64 * dt / tau_d;

    let identity_steps = steps_for("identity_time", cfg.identity_time, dt)?;
    require(identity_steps > 0, || {
        "qubit-verify.identity_time must be positive".into()
    })?;
    let stepper_initial = qubit_mixed(cfg.stepper_initial_bloch)
        .map_err(invalid("qubit-verify.stepper_initial_bloch"))?;
    Ok(Plan {
        coherence_steps,
        coherence: sim(cfg, dt, max_steps.max(1), cfg.seed)?,
        short: sim(cfg, dt, short_steps, cfg.seed)?,
        short_ratio,
        identity_steps,
        identity: sim(cfg, dt, identity_steps, cfg.seed)?,
        identity_half: sim(cfg, dt / 2.0, 2 * identity_steps, cfg.seed)?,
        kraus: sim(cfg, dt, cfg.stepper_steps, cfg.seed)?,
        diffusive: sim(cfg, dt, cfg.stepper_steps, cfg.seed.wrapping_add(1))?,
        stepper_initial,
    })
}

fn coherence_checks(cfg: &QubitVerifyConfig, p: &Plan) -> Result<Vec<Check>, ExperimentError> {
    let max = p.coherence_steps.iter().copied().max().unwrap_or(0);
    let series = unconditioned_series(&p.coherence, max)?;
    Ok(p.coherence_steps
        .iter()
        .map(|&n| {
            let t = n as f64 * cfg.dt;
            let coherence = 2.0 * series[n].matrix()[(0, 1)].norm();
            let err = (coherence - (-t / (2.0 * cfg.tau_m)).exp()).abs();
            Check::within(
                "coherence_decay",
                "blind",
                Some(t),
                err,
                None,
                Some(cfg.coherence_tolerance),
            )
        })
        .collect())
}

fn short_time_check(cfg: &QubitVerifyConfig, p: &Plan) -> Result<Check, ExperimentError> {
    let ens = EnsembleConfig::new(
        p.short.clone(),
        plus(),
        cfg.n_trajectories,
        vec![AgentSpec::Blind],
    )
    .with_metrics(vec![Metric::TraceDistance])
    .with_stride(p.short.n_steps);
    let report = run_ensemble(&ens)?;
    let td = report.agents[0]
        .trace_distance
        .as_ref()
        .expect("requested metric");
    let (lo, hi) = SHORT_TIME_FACTORS;
    Ok(Check::within(
        "short_time_trace_distance",
        "blind",
        Some(p.short.t_final()),
        *td.mean.last().expect("frames"),
        Some(lo * p.short_ratio),
        Some(hi * p.short_ratio.sqrt()),
    ))
}

fn identity_residual(sim: &SimulationConfig, n: usize) -> Result<f64, ExperimentError> {
    let series = unconditioned_series(sim, n)?;
    let lhs = commutator_rate_identity(&series, &sim.channels, sim.dt)?;
    Ok(lhs - (1.0 - purity(series.last().expect("non-empty"))))
}

fn identity_checks(cfg: &QubitVerifyConfig, p: &Plan) -> Result<Vec<Check>, ExperimentError> {
    let coarse = identity_residual(&p.identity, p.identity_steps)?;
    let fine = identity_residual(&p.identity_half, 2 * p.identity_steps)?;
    let t = Some(cfg.identity_time);
    Ok(vec![
        Check::within(
            "commutator_identity",
            "blind",
            t,
            coarse.abs(),
            None,
            Some(cfg.identity_tolerance),
        ),
        Check::within(
            "commutator_identity_halving_ratio",
            "blind",
            t,
            coarse / fine,
            Some(HALVING_RATIO_RANGE.0),
            Some(HALVING_RATIO_RANGE.1),
        ),
    ])
}

/// Final ⟨σ_z⟩ and purity of the complete description, per trajectory.
fn final_moments(
    sim: &SimulationConfig,
    initial: &DensityOperator,
    stepper: StepperKind,
    n: usize,
) -> Result<Vec<[f64; 2]>, ExperimentError> {
    let runner = TrajectoryRunner::new(
        sim.clone(),
        initial.clone(),
        vec![AgentSpec::Omniscient],
        stepper,
        sim.n_steps,
    )?;
    let sz = pauli_z();
    let rows: crate::Result<Vec<[f64; 2]>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let frames = runner.run(i)?;
            let rho = &frames.last().expect("frames").omniscient;
            Ok([rho.expectation(&sz)?, purity(rho)])
        })
        .collect();
    Ok(rows?)
}

fn stepper_checks(cfg: &QubitVerifyConfig, p: &Plan) -> Result<Vec<Check>, ExperimentError> {
    let n = cfg.n_trajectories;
    let k = final_moments(&p.kraus, &p.stepper_initial, StepperKind::Kraus, n)?;
    let d = final_moments(&p.diffusive, &p.stepper_initial, StepperKind::Diffusive, n)?;
    let t = p.kraus.t_final();
    let mut out = Vec::new();
    for (idx, name) in ["kraus_vs_diffusive_sigma_z", "kraus_vs_diffusive_purity"]
        .iter()
        .enumerate()
    {
        let pick =
            |rows: &[[f64; 2]]| -> Vec<Vec<f64>> { rows.iter().map(|r| vec![r[idx]]).collect() };
        let a = aggregate(&[t], &pick(&k), false)?;
        let b = aggregate(&[t], &pick(&d), false)?;
        let tol = MEAN_SIGMAS * a.std_error[0].hypot(b.std_error[0]) + 1e-12;
        out.push(Check::within(
            name,
            "omniscient",
            Some(t),
            a.mean[0] - b.mean[0],
            Some(-tol),
            Some(tol),
        ));
    }
    Ok(out)
}

/// Runs the suite and writes `qubit_verify.csv` (one row per check) and
/// `qubit_verify_summary.json`.
pub fn cmd_qubit_verify(
    cfg: &QubitVerifyConfig,
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
    let p = plan(&cfg)?;
    let mut rec = Recorder::start(opts, "qubit-verify")?;
    let checks = with_threads(opts.threads, || -> Result<Vec<Check>, ExperimentError> {
        let mut checks = coherence_checks(&cfg, &p)?;
        checks.push(short_time_check(&cfg, &p)?);
        checks.extend(identity_checks(&cfg, &p)?);
        checks.extend(stepper_checks(&cfg, &p)?);
        Ok(checks)
    })??;
    rec.text("qubit_verify.csv", &checks_csv(&checks))?;
    rec.finish(&cfg, Some(cfg.seed), Some(cfg.n_trajectories), checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_rejects_bad_parameters() {
        let bad = |f: fn(&mut QubitVerifyConfig)| {
            let mut c = QubitVerifyConfig::default();
            f(&mut c);
            plan(&c).err().map(|e| (e.exit_code(), e.to_string()))
        };
        let (code, msg) = bad(|c| c.dt = 0.5).unwrap();
        assert_eq!(code, 2);
        assert!(msg.contains("qubit-verify.dt"), "{msg}");
        assert!(bad(|c| c.coherence_times = vec![0.0005])
            .unwrap()
            .1
            .contains("coherence_times"));
        assert!(bad(|c| c.stepper_initial_bloch = [1.0, 1.0, 0.0]).is_some());
        assert!(bad(|c| c.n_trajectories = 1).is_some());
        assert!(bad(|_| ()).is_none());
    }

    #[test]
    fn short_window_matches_fraction() {
        let p = plan(&QubitVerifyConfig::default()).unwrap();
        assert!((p.short_ratio - 0.05).abs() < 1e-12);
        assert_eq!(p.short.n_steps, 200);
    }
}
