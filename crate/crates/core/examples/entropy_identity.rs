//! Mean relative entropy of the complete description with respect to an
//! agent equals the agent's von Neumann entropy, for agents of efficiency
//! 0, 0.5 and 1 watching a σ_z-monitored qubit.
//!
//! cargo run --release --example entropy_identity

use qpercept::ensemble::{run_ensemble, EnsembleConfig};
use qpercept::operators::{pauli_z, qubit_pure};
use qpercept::sme::{AgentSpec, MeasurementChannel, SimulationConfig};
use qpercept::state::Observable;

fn main() -> qpercept::Result<()> {
    let sim = SimulationConfig::new(
        Observable::zero(2),
        vec![MeasurementChannel::new(pauli_z(), 1.0)?],
        0.01,
        400,
        7,
    )?;
    let agents = vec![
        AgentSpec::Blind,
        AgentSpec::Partial(0.5),
        AgentSpec::Omniscient,
    ];
    let cfg = EnsembleConfig::new(sim, qubit_pure([1.0, 0.0, 0.0])?, 2000, agents).with_stride(80);
    let report = run_ensemble(&cfg)?;

    for agent in &report.agents {
        let (re, s) = (
            agent.relative_entropy.as_ref().unwrap(),
            agent.entropy.as_ref().unwrap(),
        );
        println!("agent {}", agent.label);
        println!(
            "{:>6} {:>12} {:>10} {:>12}",
            "t", "<S(O||A)>", "SE", "<S(A)>"
        );
        for i in 0..re.len() {
            println!(
                "{:>6.2} {:>12.6} {:>10.6} {:>12.6}",
                re.times[i], re.mean[i], re.std_error[i], s.mean[i]
            );
        }
    }
    let failed = report
        .failures()
        .filter(|c| c.bound == "entropy_identity")
        .count();
    println!("\nentropy identity checks failing at 3 SE: {failed}");
    Ok(())
}
