//! Early divergence of a blind agent: the mean trace distance grows between
//! T/τ_D and √(T/τ_D), with τ_D fixed by the initial variance of the
//! monitored observable.
//!
//! cargo run --release --example short_time_bounds

use qpercept::bounds::{decoherence_rate, short_time_bounds};
use qpercept::ensemble::{run_ensemble, EnsembleConfig, Metric};
use qpercept::operators::{pauli_z, qubit_pure};
use qpercept::sme::{AgentSpec, MeasurementChannel, SimulationConfig};
use qpercept::state::Observable;

fn main() -> qpercept::Result<()> {
    let channels = vec![MeasurementChannel::new(pauli_z(), 1.0)?];
    let plus = qubit_pure([1.0, 0.0, 0.0])?;
    let tau_d = 1.0 / decoherence_rate(&plus, &channels)?;
    println!("tau_D = {tau_d}");

    let dt = 1e-3;
    let sim = SimulationConfig::new(Observable::zero(2), channels.clone(), dt, 1000, 3)?;
    let cfg = EnsembleConfig::new(sim, plus.clone(), 4000, vec![AgentSpec::Blind])
        .with_metrics(vec![Metric::TraceDistance])
        .with_stride(100);
    let report = run_ensemble(&cfg)?;
    let td = report.agents[0].trace_distance.as_ref().unwrap();

    println!(
        "{:>6} {:>8} {:>10} {:>10} {:>10}",
        "T", "T/tauD", "lower", "<T>", "upper"
    );
    for i in 1..td.len() {
        let t = td.times[i];
        let b = short_time_bounds(&plus, &channels, t)?;
        println!(
            "{t:>6.2} {:>8.4} {:>10.4} {:>10.4} {:>10.4}",
            t / tau_d,
            b.lower,
            td.mean[i],
            b.upper
        );
    }
    Ok(())
}
