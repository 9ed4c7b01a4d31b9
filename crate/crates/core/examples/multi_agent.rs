//! Two agents, one reading a σ_z channel and one a σ_x channel of the same
//! qubit. Their mutual trace distance stays between |𝒫_A - 𝒫_B| and
//! √(1 - 𝒫_A) + √(1 - 𝒫_B).
//!
//! cargo run --release --example multi_agent

use qpercept::ensemble::{run_ensemble, EnsembleConfig, Metric};
use qpercept::operators::{pauli_x, pauli_z, qubit_pure};
use qpercept::sme::{AgentSpec, MeasurementChannel, SimulationConfig};
use qpercept::state::Observable;

fn main() -> qpercept::Result<()> {
    let channels = vec![
        MeasurementChannel::new(pauli_z(), 1.0)?,
        MeasurementChannel::new(pauli_x(), 1.0)?,
    ];
    let sim = SimulationConfig::new(Observable::zero(2), channels, 0.01, 400, 11)?;
    let agents = vec![
        AgentSpec::PerChannel(vec![1.0, 0.0]),
        AgentSpec::PerChannel(vec![0.0, 1.0]),
    ];
    let cfg = EnsembleConfig::new(sim, qubit_pure([1.0, 0.0, 1.0])?, 2000, agents)
        .with_metrics(vec![Metric::Purity])
        .with_stride(40)
        .with_pairs(vec![(0, 1)]);
    let report = run_ensemble(&cfg)?;
    let pair = &report.pairs[0];

    println!("{} vs {}", pair.first, pair.second);
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "t", "lower", "<T(A,B)>", "SE", "upper"
    );
    for i in 0..pair.lower.len() {
        println!(
            "{:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            report.times[i],
            pair.lower[i],
            pair.trace_distance.mean[i],
            pair.trace_distance.std_error[i],
            pair.upper[i]
        );
    }
    println!("\ntriangle checks failing: {}", report.failures().count());
    Ok(())
}
