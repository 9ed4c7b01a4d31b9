//! Position-monitored harmonic oscillator in the Gaussian picture: moments
//! relax to a steady state of purity √η, and the steady bounds and relative
//! entropy trace the transition from blind to fully informed.
//!
//! cargo run --release --example gaussian_transition

use qpercept::gaussian::{
    entropy_eta_derivative, integrate_moments, purity_from_covariance, steady_state,
    transition_curves, GaussianOscillatorState,
};

fn main() -> qpercept::Result<()> {
    println!("relaxation from the ground state (omega = tau_m = 1)");
    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "eta", "P(t=10)", "P(t=50)", "sqrt(eta)"
    );
    for eta in [0.1, 0.25, 0.5, 1.0] {
        let series =
            integrate_moments(&GaussianOscillatorState::ground(1.0, 1.0, eta)?, 0.01, 5000)?;
        let steady = purity_from_covariance(&steady_state(1.0, 1.0, eta)?);
        println!(
            "{eta:>6} {:>12.8} {:>12.8} {:>12.8}",
            purity_from_covariance(&series[1000]),
            purity_from_covariance(&series[5000]),
            steady
        );
    }

    println!("\nsteady-state transition curves");
    println!(
        "{:>6} {:>10} {:>10} {:>12} {:>12}",
        "eta", "lower", "upper", "S(O||A)", "dS/deta"
    );
    let grid = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];
    for row in transition_curves(&grid)? {
        println!(
            "{:>6} {:>10.6} {:>10.6} {:>12.6} {:>12.6}",
            row.eta,
            row.lower,
            row.upper,
            row.rel_entropy,
            entropy_eta_derivative(row.eta)?
        );
    }
    Ok(())
}
