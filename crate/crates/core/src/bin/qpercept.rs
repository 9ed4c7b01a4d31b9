//! Command-line front end for the experiment runners.
//!
//! Exit status: 0 when every check passes, 1 on a check failure or runtime
//! error, 2 on a configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpercept::experiments::{
    cmd_jz, cmd_multi_agent, cmd_oscillator_curves, cmd_qubit_verify, ExperimentConfig,
    ExperimentError, Outcome, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "qpercept",
    version,
    about = "Monitored-system trajectories seen by differently informed agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with [jz], [oscillator-curves], [qubit-verify] and
    /// [multi-agent] sections; defaults apply to anything missing.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (all cores by default); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides the configured number of trajectories.
    #[arg(long, global = true)]
    trajectories: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Relative-entropy curves for a J_z-monitored spin.
    Jz,
    /// Steady-state transition curves of the position-monitored oscillator.
    OscillatorCurves,
    /// Analytic regression suite for a σ_z-monitored qubit.
    QubitVerify,
    /// Triangle bounds between agents reading different channels.
    MultiAgent,
}

fn run(cli: &Cli) -> Result<Outcome, ExperimentError> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let opts = RunOptions {
        out_dir: cli.out.clone(),
        seed: cli.seed,
        threads: cli.threads,
        trajectories: cli.trajectories,
    };
    match cli.command {
        Command::Jz => cmd_jz(&cfg.jz, &opts),
        Command::OscillatorCurves => cmd_oscillator_curves(&cfg.oscillator_curves, &opts),
        Command::QubitVerify => cmd_qubit_verify(&cfg.qubit_verify, &opts),
        Command::MultiAgent => cmd_multi_agent(&cfg.multi_agent, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let failed: Vec<_> = outcome.failures().collect();
            for c in &failed {
                eprintln!(
                    "FAIL {} [{}] t={} value={} range=[{}, {}]",
                    c.name,
                    c.subject,
                    c.time.map_or("-".into(), |t| t.to_string()),
                    c.value,
                    c.lower.map_or("-inf".into(), |x| x.to_string()),
                    c.upper.map_or("inf".into(), |x| x.to_string()),
                );
            }
            println!(
                "{}: {}/{} checks passed",
                outcome.experiment,
                outcome.checks.len() - failed.len(),
                outcome.checks.len()
            );
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
