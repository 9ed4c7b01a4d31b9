//! A large spin monitored through J_z, seen by agents of efficiency 0, 0.5
//! and 0.9. Runs the same experiment as `qpercept jz` at reduced size and
//! prints the per-agent tables it writes.
//!
//! cargo run --release --example jz_perception

use qpercept::experiments::{cmd_jz, JzConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = JzConfig {
        levels: 30,
        n_trajectories: 100,
        sample_stride: 200,
        ..JzConfig::default()
    };
    let out = std::env::temp_dir().join("qpercept_jz_example");
    let outcome = cmd_jz(&cfg, &RunOptions::new(&out).with_seed(3))?;
    for file in outcome
        .files
        .iter()
        .filter(|f| f.extension().is_some_and(|e| e == "csv"))
    {
        println!("{}", file.display());
        print!("{}", std::fs::read_to_string(file)?);
    }
    println!(
        "{} of {} checks passed",
        outcome.checks.len() - outcome.failures().count(),
        outcome.checks.len()
    );
    Ok(())
}
