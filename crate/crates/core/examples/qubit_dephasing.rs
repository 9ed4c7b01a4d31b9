//! A qubit prepared in |+⟩ under σ_z monitoring. The blind description
//! loses its coherence as e^(-t/2τ_m) while a single conditioned trajectory
//! collapses towards an eigenstate.
//!
//! cargo run --release --example qubit_dephasing

use qpercept::metrics::{purity, trace_distance};
use qpercept::operators::{pauli_z, qubit_pure};
use qpercept::sme::{
    run_trajectory, step_unconditioned, AgentSpec, MeasurementChannel, SimulationConfig,
};
use qpercept::state::Observable;

fn main() -> qpercept::Result<()> {
    let tau_m = 1.0;
    let sim = SimulationConfig::new(
        Observable::zero(2),
        vec![MeasurementChannel::new(pauli_z(), tau_m)?],
        1e-3,
        4000,
        42,
    )?;
    let plus = qubit_pure([1.0, 0.0, 0.0])?;

    println!("blind coherence against the closed form");
    println!("{:>6} {:>14} {:>14}", "t", "2|rho01|", "e^(-t/2tau)");
    let mut rho = plus.clone();
    for step in 1..=sim.n_steps {
        rho = step_unconditioned(&rho, &sim)?;
        if step % 1000 == 0 {
            let t = step as f64 * sim.dt;
            println!(
                "{t:>6.2} {:>14.10} {:>14.10}",
                2.0 * rho.matrix()[(0, 1)].norm(),
                (-t / (2.0 * tau_m)).exp()
            );
        }
    }

    println!("\none conditioned trajectory (seed {})", sim.seed);
    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>14}",
        "t", "<sz>_O", "P_O", "P_blind", "T(O, blind)"
    );
    for f in run_trajectory(&sim, &plus, &[AgentSpec::Blind])?
        .iter()
        .step_by(500)
    {
        println!(
            "{:>6.2} {:>10.5} {:>10.6} {:>12.6} {:>14.6}",
            f.t,
            f.omniscient.expectation(&pauli_z())?,
            purity(&f.omniscient),
            purity(&f.states[0]),
            trace_distance(&f.omniscient, &f.states[0])?
        );
    }
    Ok(())
}
