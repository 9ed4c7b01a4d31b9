//! How far a blind agent's expectation of σ_x can drift from the complete
//! description of a driven, σ_z-monitored qubit, compared with the bound
//! built from the variance of the Heisenberg rate operator along the blind
//! path.
//!
//! cargo run --release --example observable_bounds

use qpercept::bounds::{heisenberg_rate_operator, observable_gap_bound};
use qpercept::operators::{pauli_x, pauli_y, pauli_z, qubit_pure};
use qpercept::sme::{
    step_unconditioned, AgentSpec, MeasurementChannel, SimulationConfig, StepperKind,
    TrajectoryRunner,
};

fn main() -> qpercept::Result<()> {
    let h = pauli_y().scaled(0.5);
    let x = pauli_x();
    let sim = SimulationConfig::new(
        h.clone(),
        vec![MeasurementChannel::new(pauli_z(), 1.0)?],
        1e-3,
        1000,
        5,
    )?;
    let runner = TrajectoryRunner::new(
        sim.clone(),
        qubit_pure([0.0, 0.0, 1.0])?,
        vec![AgentSpec::Blind],
        StepperKind::Kraus,
        100,
    )?;
    let v = heisenberg_rate_operator(&x, &h, &sim.channels)?;
    println!("V_X =\n{}", v.matrix());

    let n = 1000;
    let mut runs = Vec::with_capacity(n);
    for i in 0..n as u64 {
        runs.push(runner.run(i)?);
    }
    // the bound averages over the blind path at every step
    let mut blind = vec![runner.initial().clone()];
    for _ in 0..sim.n_steps {
        blind.push(step_unconditioned(blind.last().expect("non-empty"), &sim)?);
    }
    println!("{:>6} {:>16} {:>12}", "T", "<(dX)^2>", "bound");
    for (k, frame) in runs[0].iter().enumerate().skip(1) {
        let mean_sq = runs
            .iter()
            .map(|r| {
                let f = &r[k];
                (f.omniscient.expectation(&x).unwrap() - f.states[0].expectation(&x).unwrap())
                    .powi(2)
            })
            .sum::<f64>()
            / n as f64;
        let bound = observable_gap_bound(&blind[..=frame.step], &x, &h, &sim.channels, frame.t)?;
        println!("{:>6.2} {mean_sq:>16.6} {bound:>12.6}", frame.t);
    }
    Ok(())
}
