//! Deterministic parts of the monitored dynamics: the dephasing dissipator,
//! the innovation term and the Lindblad generator, integrated exactly when
//! it acts elementwise and by RK4 otherwise.

use crate::error::{check_dim, Result};
use crate::operators::{anticommutator, commutator};
use crate::state::{c, trace_product, CMatrix, DensityOperator, Observable, C64, TOL_PSD};

use super::channel::{MeasurementChannel, SimulationConfig};

/// -Σ_α 1/(8 τ_α) [A_α, [A_α, ρ]].
pub fn lindblad_dissipator(
    rho: &DensityOperator,
    channels: &[MeasurementChannel],
) -> Result<CMatrix> {
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for ch in channels {
        check_dim(n, ch.observable.dim())?;
        let a = ch.observable.matrix();
        let inner = commutator(a, rho.matrix());
        out -= commutator(a, &inner) * c(ch.dephasing_rate());
    }
    Ok(out)
}

/// (4 τ_m)^{-1/2} ({A, ρ} - 2 tr(Aρ) ρ).
pub fn innovation(rho: &DensityOperator, a: &Observable, tau_m: f64) -> Result<CMatrix> {
    check_dim(rho.dim(), a.dim())?;
    let mean = trace_product(a.matrix(), rho.matrix());
    let m = anticommutator(a.matrix(), rho.matrix()) - rho.matrix() * c(2.0 * mean);
    Ok(m * c(1.0 / (4.0 * tau_m).sqrt()))
}

/// A monitored observable with its eigendecomposition cached. When the
/// observable is already diagonal, `basis` is `None` and all work is
/// elementwise.
#[derive(Debug, Clone)]
pub(crate) struct Monitor {
    pub tau_m: f64,
    pub eigenvalues: Vec<f64>,
    pub basis: Option<CMatrix>,
    pub a: CMatrix,
    pub a_sq: CMatrix,
}

impl Monitor {
    pub fn new(ch: &MeasurementChannel) -> Self {
        let a = ch.observable.matrix().clone();
        let (eigenvalues, basis) = if ch.observable.is_diagonal() {
            (a.diagonal().iter().map(|z| z.re).collect(), None)
        } else {
            let s = ch.observable.spectrum();
            (s.eigenvalues, Some(s.eigenvectors))
        };
        Self {
            tau_m: ch.tau_m,
            eigenvalues,
            basis,
            a_sq: &a * &a,
            a,
        }
    }

    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        match &self.basis {
            Some(v) => v.adjoint() * m * v,
            None => m.clone(),
        }
    }

    pub fn to_standard_basis(&self, m: &CMatrix) -> CMatrix {
        match &self.basis {
            Some(v) => v * m * v.adjoint(),
            None => m.clone(),
        }
    }

    /// Diagonal of ρ in the eigenbasis of A.
    pub fn populations(&self, rho: &CMatrix) -> Vec<f64> {
        match &self.basis {
            Some(v) => (0..self.eigenvalues.len())
                .map(|j| {
                    let col = v.column(j);
                    (col.adjoint() * rho * col)[(0, 0)].re.max(0.0)
                })
                .collect(),
            None => rho.diagonal().iter().map(|z| z.re.max(0.0)).collect(),
        }
    }

    pub fn mean(&self, rho: &CMatrix) -> f64 {
        trace_product(&self.a, rho)
    }

    /// Adds `weight` · [A, [A, ρ]] to `out`.
    fn add_double_commutator(&self, rho: &CMatrix, weight: f64, out: &mut CMatrix) {
        if self.basis.is_none() {
            let n = rho.nrows();
            for j in 0..n {
                for i in 0..n {
                    let d = self.eigenvalues[i] - self.eigenvalues[j];
                    out[(i, j)] += rho[(i, j)] * (weight * d * d);
                }
            }
        } else {
            let ara = &self.a * rho * &self.a;
            *out += (&self.a_sq * rho + rho * &self.a_sq - ara * c(2.0)) * c(weight);
        }
    }
}

#[derive(Debug, Clone)]
enum HamiltonianKind {
    Zero,
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

/// ρ ↦ -i[H, ρ] - Σ_α w_α/(8 τ_α) [A_α, [A_α, ρ]] with per-channel weights
/// w_α ∈ [0, 1] (the unseen fraction of each channel).
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    dim: usize,
    hamiltonian: HamiltonianKind,
    dephasing: Vec<(Monitor, f64)>,
    /// Exact elementwise propagator for one step size, see [`Self::prepared`].
    propagator: Option<(f64, CMatrix)>,
}

impl Generator {
    pub fn new(hamiltonian: &Observable, monitors: &[Monitor], weights: &[f64]) -> Self {
        let n = hamiltonian.dim();
        let hamiltonian = if hamiltonian.is_zero() {
            HamiltonianKind::Zero
        } else if hamiltonian.is_diagonal() {
            HamiltonianKind::Diagonal(
                hamiltonian
                    .matrix()
                    .diagonal()
                    .iter()
                    .map(|z| z.re)
                    .collect(),
            )
        } else {
            HamiltonianKind::Dense(hamiltonian.matrix().clone())
        };
        let dephasing = monitors
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(m, &w)| (m.clone(), w))
            .collect();
        Self {
            dim: n,
            hamiltonian,
            dephasing,
            propagator: None,
        }
    }

    /// Caches the exact propagator for steps of `dt` when the generator acts
    /// elementwise.
    pub fn prepared(mut self, dt: f64) -> Self {
        self.propagator = self.schur_factors(dt).map(|k| (dt, k));
        self
    }

    pub fn full(config: &SimulationConfig) -> Self {
        let monitors: Vec<Monitor> = config.channels.iter().map(Monitor::new).collect();
        Self::new(&config.hamiltonian, &monitors, &vec![1.0; monitors.len()])
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.hamiltonian, HamiltonianKind::Zero) && self.dephasing.is_empty()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = rho.nrows();
        let mut out = match &self.hamiltonian {
            HamiltonianKind::Zero => CMatrix::zeros(n, n),
            HamiltonianKind::Diagonal(h) => {
                CMatrix::from_fn(n, n, |i, j| rho[(i, j)] * C64::new(0.0, -(h[i] - h[j])))
            }
            HamiltonianKind::Dense(h) => commutator(h, rho) * C64::new(0.0, -1.0),
        };
        for (m, w) in &self.dephasing {
            m.add_double_commutator(rho, -w / (8.0 * m.tau_m), &mut out);
        }
        out
    }

    /// One classical fourth-order Runge-Kutta step.
    pub fn rk4(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        if self.is_trivial() {
            return rho.clone();
        }
        let half = c(0.5 * dt);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * c(dt)));
        rho + (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0)
    }

    /// exp(λ_ij dt) with λ_ij = -i(h_i - h_j) - Σ_α w_α (a_i - a_j)²/(8 τ_α),
    /// available when H and every weighted monitor are diagonal. The kernel
    /// is a phase kernel times a Gaussian kernel, both positive definite, so
    /// the Schur product with it maps positive matrices to positive matrices.
    fn schur_factors(&self, dt: f64) -> Option<CMatrix> {
        if self.dephasing.iter().any(|(m, _)| m.basis.is_some()) {
            return None;
        }
        let h: Vec<f64> = match &self.hamiltonian {
            HamiltonianKind::Zero => vec![0.0; self.dim],
            HamiltonianKind::Diagonal(h) => h.clone(),
            HamiltonianKind::Dense(_) => return None,
        };
        Some(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let decay: f64 = self
                .dephasing
                .iter()
                .map(|(m, w)| w * (m.eigenvalues[i] - m.eigenvalues[j]).powi(2) / (8.0 * m.tau_m))
                .sum();
            C64::from_polar((-decay * dt).exp(), -(h[i] - h[j]) * dt)
        }))
    }

    /// Evolves the positive matrix `m` by `dt`. Elementwise generators use
    /// the exact propagator and only renormalize; otherwise RK4 followed by
    /// a checked repair.
    pub fn advance(&self, m: &CMatrix, dt: f64) -> Result<DensityOperator> {
        match self.propagate(m, dt) {
            (next, true) => DensityOperator::renormalized(next),
            (next, false) => DensityOperator::repair(next, TOL_PSD),
        }
    }

    /// One deterministic step, exact when the generator is trivial or acts
    /// elementwise and RK4 otherwise. The flag is true when the step is an
    /// exactly positive map.
    pub fn propagate(&self, m: &CMatrix, dt: f64) -> (CMatrix, bool) {
        if self.is_trivial() {
            return (m.clone(), true);
        }
        match &self.propagator {
            Some((d, k)) if *d == dt => (m.component_mul(k), true),
            _ => match self.schur_factors(dt) {
                Some(k) => (m.component_mul(&k), true),
                None => (self.rk4(m, dt), false),
            },
        }
    }

    pub fn step(&self, rho: &DensityOperator, dt: f64) -> Result<DensityOperator> {
        self.advance(rho.matrix(), dt)
    }
}

/// One step of dρ = -i[H, ρ] dt + 𝒟[ρ] dt.
pub fn step_unconditioned(
    rho: &DensityOperator,
    config: &SimulationConfig,
) -> Result<DensityOperator> {
    check_dim(config.dim(), rho.dim())?;
    Generator::full(config).step(rho, config.dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::purity;
    use crate::operators::{pauli_x, pauli_z, qubit_mixed, qubit_pure};
    use crate::state::{hermiticity_error, trace_re};

    fn dephasing_config(tau: f64, dt: f64, steps: usize) -> SimulationConfig {
        SimulationConfig::new(
            Observable::zero(2),
            vec![MeasurementChannel::new(pauli_z(), tau).unwrap()],
            dt,
            steps,
            0,
        )
        .unwrap()
    }

    #[test]
    fn dissipator_examples() {
        let ch = vec![MeasurementChannel::new(pauli_z(), 2.0).unwrap()];
        let diag = qubit_mixed([0.0, 0.0, 0.4]).unwrap();
        assert!(lindblad_dissipator(&diag, &ch).unwrap().norm() < 1e-15);

        // off-diagonal entries decay at 1/(2 τ_m)
        let rho = qubit_mixed([0.6, -0.2, 0.1]).unwrap();
        let d = lindblad_dissipator(&rho, &ch).unwrap();
        let expected = -rho.matrix()[(0, 1)] / 4.0;
        assert!((d[(0, 1)] - expected).norm() < 1e-15);
        assert!(hermiticity_error(&d) < 1e-12 && trace_re(&d).abs() < 1e-12);

        let id = vec![MeasurementChannel::new(Observable::identity(2), 1.0).unwrap()];
        assert!(lindblad_dissipator(&rho, &id).unwrap().norm() < 1e-15);
    }

    #[test]
    fn innovation_examples() {
        let z = pauli_z();
        let up = DensityOperator::basis(2, 0).unwrap();
        assert!(innovation(&up, &z, 1.0).unwrap().norm() < 1e-15);

        let plus = qubit_pure([1.0, 0.0, 0.0]).unwrap();
        let i = innovation(&plus, &z, 0.25).unwrap();
        assert!((i[(0, 0)].re - 1.0).abs() < 1e-12 && (i[(1, 1)].re + 1.0).abs() < 1e-12);
        assert!(i[(0, 1)].norm() < 1e-12);

        let mm = DensityOperator::maximally_mixed(2);
        let tau = 0.7;
        let i = innovation(&mm, &pauli_x(), tau).unwrap();
        let expected = pauli_x().matrix() * c(1.0 / (4.0 * tau).sqrt());
        assert!((i - expected).norm() < 1e-14);
    }

    #[test]
    fn monitor_paths_agree() {
        // the dense and elementwise double commutators must coincide
        let rho = qubit_mixed([0.3, 0.5, -0.2]).unwrap();
        let ch = MeasurementChannel::new(pauli_z(), 1.0).unwrap();
        let diag = Monitor::new(&ch);
        let mut dense = diag.clone();
        dense.basis = Some(CMatrix::identity(2, 2));
        let mut a = CMatrix::zeros(2, 2);
        let mut b = CMatrix::zeros(2, 2);
        diag.add_double_commutator(rho.matrix(), 1.0, &mut a);
        dense.add_double_commutator(rho.matrix(), 1.0, &mut b);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn exact_propagator_matches_rk4() {
        use crate::operators::{gaussian_level_state, jz, jz_levels};
        let ch = MeasurementChannel::new(jz(9), 1.0).unwrap();
        let h = Observable::from_real_diagonal(&jz_levels(9)).scaled(0.3);
        let monitors = vec![Monitor::new(&ch)];
        let g = Generator::new(&h, &monitors, &[0.7]);
        let rho = gaussian_level_state(&jz_levels(9), 0.5, 1.5).unwrap();
        let dt = 0.002;
        let (exact, positive) = g.propagate(rho.matrix(), dt);
        assert!(positive);
        assert!((exact - g.rk4(rho.matrix(), dt)).norm() < 1e-9);
        let prepared = g.clone().prepared(dt);
        assert_eq!(
            prepared.propagate(rho.matrix(), dt).0,
            g.propagate(rho.matrix(), dt).0
        );

        // dense observables fall back to RK4
        let dense = Generator::new(
            &h,
            &[Monitor::new(
                &MeasurementChannel::new(pauli_x(), 1.0).unwrap(),
            )],
            &[1.0],
        );
        assert!(dense.schur_factors(dt).is_none());
    }

    #[test]
    fn exact_propagator_stays_positive_at_large_steps() {
        use crate::operators::{gaussian_level_state, jz, jz_levels};
        let monitors = vec![Monitor::new(&MeasurementChannel::new(jz(30), 1.0).unwrap())];
        let g = Generator::new(&Observable::zero(30), &monitors, &[1.0]);
        let rho = gaussian_level_state(&jz_levels(30), 0.0, 3.0).unwrap();
        let next = g.advance(rho.matrix(), 0.5).unwrap();
        assert!(next.spectrum().min() > -1e-12);
        assert!((trace_re(next.matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unconditioned_coherence_decay() {
        let tau = 1.0;
        let dt = 0.01;
        let cfg = dephasing_config(tau, dt, 100);
        let mut rho = qubit_pure([1.0, 0.0, 0.0]).unwrap();
        let mut last_purity = purity(&rho);
        for _ in 0..100 {
            rho = step_unconditioned(&rho, &cfg).unwrap();
            assert!((trace_re(rho.matrix()) - 1.0).abs() < 1e-12);
            let p = purity(&rho);
            assert!(p <= last_purity + 1e-15);
            last_purity = p;
        }
        let expected = 0.5 * (-1.0f64 / (2.0 * tau)).exp();
        assert!((rho.matrix()[(0, 1)].re - expected).abs() < 1e-10);
    }

    #[test]
    fn diagonal_state_is_fixed_point() {
        let cfg = dephasing_config(1.0, 0.01, 1);
        let rho = qubit_mixed([0.0, 0.0, -0.3]).unwrap();
        let next = step_unconditioned(&rho, &cfg).unwrap();
        assert!((next.matrix() - rho.matrix()).norm() < 1e-15);
    }
}
