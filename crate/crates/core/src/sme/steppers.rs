//! Single-step updates of conditioned and filtered states.
//!
//! The diffusive steppers advance the drift with the same deterministic step
//! as [`step_unconditioned`](super::step_unconditioned) (exact for
//! elementwise generators, RK4 otherwise) and add the innovation increments
//! Euler-Maruyama style, evaluated at the start of the step. With zero
//! noise, or zero efficiency, they therefore reduce exactly to the
//! unconditioned step.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::state::{c, CMatrix, DensityOperator, TOL_PSD};

use super::channel::{check_efficiency, SimulationConfig};
use super::generator::{innovation, Generator, Monitor};
use super::noise::Gaussian;

/// Gaussian weak measurement of `monitor` with readout `r` at strength
/// `efficiency`: ρ ↦ K ρ K / tr(K ρ K) with
/// K ∝ exp(-(dt·efficiency/(4 τ_m)) (r - A)²).
pub(crate) fn kraus_update(
    monitor: &Monitor,
    rho: &CMatrix,
    readout: f64,
    efficiency: f64,
    dt: f64,
) -> CMatrix {
    if efficiency <= 0.0 {
        return rho.clone();
    }
    let s = dt * efficiency / (4.0 * monitor.tau_m);
    let gaps: Vec<f64> = monitor
        .eigenvalues
        .iter()
        .map(|a| (readout - a).powi(2))
        .collect();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = gaps.iter().map(|g| (-s * (g - min_gap)).exp()).collect();
    let n = rho.nrows();
    if monitor.basis.is_none() {
        // tr(KρK) = Σ w_i² ρ_ii, so weighting and normalization fuse
        let tr: f64 = (0..n).map(|i| w[i] * w[i] * rho[(i, i)].re).sum();
        return CMatrix::from_fn(n, n, |i, j| rho[(i, j)] * (w[i] * w[j] / tr));
    }
    let mut m = monitor.to_eigenbasis(rho);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= w[i] * w[j];
        }
    }
    let m = monitor.to_standard_basis(&m);
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m / c(tr)
}

/// Samples a readout of `monitor` on state `rho`: an eigenvalue a_k is drawn
/// with probability ⟨k|ρ|k⟩, then r ~ N(a_k, τ_m/dt). Returns (a_k, r).
pub(crate) fn sample_readout<R: Rng>(
    monitor: &Monitor,
    rho: &CMatrix,
    dt: f64,
    gauss: &mut Gaussian<R>,
) -> (f64, f64) {
    let center = sample_eigenvalue(monitor, rho, gauss.uniform());
    let r = center + (monitor.tau_m / dt).sqrt() * gauss.standard();
    (center, r)
}

pub(crate) fn sample_eigenvalue(monitor: &Monitor, rho: &CMatrix, u: f64) -> f64 {
    let pops = monitor.populations(rho);
    let total: f64 = pops.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    for (p, a) in pops.iter().zip(&monitor.eigenvalues) {
        acc += p;
        if target < acc {
            return *a;
        }
    }
    // u·total rounded onto the last edge: take the last populated level
    let last = pops
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(pops.len() - 1);
    monitor.eigenvalues[last]
}

/// Clip tolerance for the diffusive steppers. Euler-Maruyama leaves
/// eigenvalues of a near-pure state about -(Var A/4τ_m)(dW² - dt) below zero;
/// this bounds that by the spectral spread of each A.
fn diffusive_tolerance(monitors: &[Monitor], weights: &[f64], noise: &[f64], dt: f64) -> f64 {
    let mut tol = TOL_PSD;
    for ((m, &w), &dw) in monitors.iter().zip(weights).zip(noise) {
        let hi = m
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = m.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        tol += w * (hi - lo).powi(2) * (dw * dw).max(dt) / m.tau_m;
    }
    tol
}

pub(crate) fn diffusive_step(
    generator: &Generator,
    monitors: &[Monitor],
    config: &SimulationConfig,
    rho: &DensityOperator,
    etas: &[f64],
    noise: &[f64],
) -> Result<DensityOperator> {
    let mut next = generator.propagate(rho.matrix(), config.dt).0;
    for ((ch, &eta), &dv) in config.channels.iter().zip(etas).zip(noise) {
        if eta > 0.0 && dv != 0.0 {
            next += innovation(rho, &ch.observable, ch.tau_m)? * c(eta.sqrt() * dv);
        }
    }
    let tol = diffusive_tolerance(monitors, etas, noise, config.dt);
    DensityOperator::repair(next, tol)
}

fn check_noise(config: &SimulationConfig, rho: &DensityOperator, noise: &[f64]) -> Result<()> {
    check_dim(config.dim(), rho.dim())?;
    if noise.len() != config.channels.len() {
        return Err(Error::DimensionMismatch {
            expected: config.channels.len(),
            found: noise.len(),
        });
    }
    Ok(())
}

/// One step of the fully conditioned diffusive equation driven by the
/// per-channel Wiener increments `dw`.
pub fn step_conditioned_diffusive(
    rho: &DensityOperator,
    config: &SimulationConfig,
    dw: &[f64],
) -> Result<DensityOperator> {
    let etas = vec![1.0; config.channels.len()];
    step_filtered(rho, config, &etas, dw)
}

/// One step of the efficiency-filtered equation: full dissipator plus
/// √η_α I_α[ρ] dV_α. η = 0 reproduces the unconditioned step and η = 1 the
/// conditioned one.
pub fn step_filtered(
    rho_b: &DensityOperator,
    config: &SimulationConfig,
    etas: &[f64],
    dv: &[f64],
) -> Result<DensityOperator> {
    check_noise(config, rho_b, dv)?;
    if etas.len() != config.channels.len() {
        return Err(Error::DimensionMismatch {
            expected: config.channels.len(),
            found: etas.len(),
        });
    }
    for &e in etas {
        check_efficiency(e)?;
    }
    let monitors: Vec<Monitor> = config.channels.iter().map(Monitor::new).collect();
    diffusive_step(&Generator::full(config), &monitors, config, rho_b, etas, dv)
}

/// One step of conditioned evolution as a sequence of Gaussian weak
/// measurements, one per channel, followed by the Hamiltonian step. Returns
/// the new state and the readouts.
pub fn step_conditioned_kraus<R: Rng>(
    rho: &DensityOperator,
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<(DensityOperator, Vec<f64>)> {
    check_dim(config.dim(), rho.dim())?;
    let mut gauss = Gaussian::new(rng);
    let mut m = rho.matrix().clone();
    let mut records = Vec::with_capacity(config.channels.len());
    for ch in &config.channels {
        let monitor = Monitor::new(ch);
        let (_, r) = sample_readout(&monitor, &m, config.dt, &mut gauss);
        m = kraus_update(&monitor, &m, r, 1.0, config.dt);
        records.push(r);
    }
    let monitors: Vec<Monitor> = config.channels.iter().map(Monitor::new).collect();
    let unitary = Generator::new(&config.hamiltonian, &monitors, &vec![0.0; monitors.len()]);
    let next = unitary.advance(&m, config.dt)?;
    Ok((next, records))
}
