//! Counter-based randomness and noise bookkeeping between agents.
//!
//! Every random number used for trajectory `i`, step `k`, channel `α` comes
//! from a ChaCha stream addressed by `(seed, i, k, α)`, so a trajectory is
//! reproducible bit for bit no matter which thread runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Result};
use crate::state::{trace_product, DensityOperator, Observable};

/// 32-bit words reserved per channel inside one step's stream.
const WORDS_PER_CHANNEL: u128 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseKey {
    pub seed: u64,
    pub trajectory: u64,
    pub step: u64,
    pub channel: u64,
}

impl NoiseKey {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trajectory.to_le_bytes());
        key[16..24].copy_from_slice(b"qpercept");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.step);
        rng.set_word_pos(self.channel as u128 * WORDS_PER_CHANNEL);
        rng
    }
}

/// Standard normal draws by Box-Muller, consuming exactly two uniforms per
/// pair so the stream position stays predictable.
pub struct Gaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> Gaussian<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// The noise dW that the omniscient agent attributes to the same record an
/// agent with state `rho_self` explains with its own innovation noise dV:
/// dW = (tr(ρ_self A) - tr(ρ_O A)) dt/√τ_m + dV.
pub fn consistent_noises(
    rho_self: &DensityOperator,
    rho_o: &DensityOperator,
    a: &Observable,
    tau_m: f64,
    dt: f64,
    dv: f64,
) -> Result<f64> {
    check_dim(rho_self.dim(), rho_o.dim())?;
    check_dim(rho_self.dim(), a.dim())?;
    let gap =
        trace_product(rho_self.matrix(), a.matrix()) - trace_product(rho_o.matrix(), a.matrix());
    Ok(gap * dt / tau_m.sqrt() + dv)
}

/// Inverse of [`consistent_noises`]: the innovation noise dV of an agent
/// whose record O explains with noise dW.
pub fn innovation_noise(
    rho_self: &DensityOperator,
    rho_o: &DensityOperator,
    a: &Observable,
    tau_m: f64,
    dt: f64,
    dw: f64,
) -> Result<f64> {
    let offset = consistent_noises(rho_self, rho_o, a, tau_m, dt, 0.0)?;
    Ok(dw - offset)
}
