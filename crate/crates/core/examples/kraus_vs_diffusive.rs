//! The measurement-operator stepper and the diffusive stepper sample the
//! same conditioned dynamics: final moments agree within statistical error
//! over independent noise streams.
//!
//! cargo run --release --example kraus_vs_diffusive

use qpercept::ensemble::{aggregate, MEAN_SIGMAS};
use qpercept::metrics::purity;
use qpercept::operators::{pauli_z, qubit_mixed};
use qpercept::sme::{
    AgentSpec, MeasurementChannel, SimulationConfig, StepperKind, TrajectoryRunner,
};
use qpercept::state::Observable;

fn final_moments(stepper: StepperKind, seed: u64, n: u64) -> qpercept::Result<Vec<Vec<f64>>> {
    let sim = SimulationConfig::new(
        Observable::zero(2),
        vec![MeasurementChannel::new(pauli_z(), 1.0)?],
        1e-3,
        200,
        seed,
    )?;
    let runner = TrajectoryRunner::new(
        sim,
        qubit_mixed([0.4, 0.0, 0.3])?,
        vec![AgentSpec::Omniscient],
        stepper,
        200,
    )?;
    (0..n)
        .map(|i| {
            let rho = runner.run(i)?.pop().expect("final frame").omniscient;
            Ok(vec![rho.expectation(&pauli_z())?, purity(&rho)])
        })
        .collect()
}

fn main() -> qpercept::Result<()> {
    let n = 4000;
    let kraus = final_moments(StepperKind::Kraus, 1, n)?;
    let diffusive = final_moments(StepperKind::Diffusive, 2, n)?;
    for (idx, name) in ["<sigma_z>", "purity"].iter().enumerate() {
        let column = |rows: &[Vec<f64>]| rows.iter().map(|r| vec![r[idx]]).collect::<Vec<_>>();
        let a = aggregate(&[0.2], &column(&kraus), false)?;
        let b = aggregate(&[0.2], &column(&diffusive), false)?;
        let tol = MEAN_SIGMAS * a.std_error[0].hypot(b.std_error[0]);
        println!(
            "{name:>10}: kraus {:.5} ± {:.5}, diffusive {:.5} ± {:.5}, |diff| {:.5} vs 3 SE {tol:.5}",
            a.mean[0],
            a.std_error[0],
            b.mean[0],
            b.std_error[0],
            (a.mean[0] - b.mean[0]).abs()
        );
    }
    Ok(())
}
