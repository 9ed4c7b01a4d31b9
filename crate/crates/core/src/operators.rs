//! Standard operators and small matrix helpers.

use crate::error::{Error, Result};
use crate::state::{c, CMatrix, CVector, DensityOperator, Observable, C64};

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn pauli_x() -> Observable {
    Observable::new(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), c(1.0), c(1.0), c(0.0)],
    ))
    .expect("hermitian")
}

pub fn pauli_y() -> Observable {
    let i = C64::new(0.0, 1.0);
    Observable::new(CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])).expect("hermitian")
}

pub fn pauli_z() -> Observable {
    Observable::from_real_diagonal(&[1.0, -1.0])
}

/// Angular momentum J_z = Σ m |m⟩⟨m| over `levels` consecutive integers
/// m = -⌊levels/2⌋, ..., levels - 1 - ⌊levels/2⌋.
pub fn jz(levels: usize) -> Observable {
    let lowest = -((levels / 2) as f64);
    let values: Vec<f64> = (0..levels).map(|k| lowest + k as f64).collect();
    Observable::from_real_diagonal(&values)
}

/// The m-values J_z is built on, in basis order.
pub fn jz_levels(levels: usize) -> Vec<f64> {
    let lowest = -((levels / 2) as f64);
    (0..levels).map(|k| lowest + k as f64).collect()
}

/// Truncated annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    a
}

/// X = (a + a†)/√2.
pub fn position(dim: usize) -> Observable {
    let a = annihilation(dim);
    Observable::new((&a + a.adjoint()) * c(std::f64::consts::FRAC_1_SQRT_2)).expect("hermitian")
}

/// P = i(a† - a)/√2.
pub fn momentum(dim: usize) -> Observable {
    let a = annihilation(dim);
    let i = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    Observable::new((a.adjoint() - &a) * i).expect("hermitian")
}

/// H = ω (a†a + 1/2) on `dim` Fock levels.
pub fn oscillator_hamiltonian(dim: usize, omega: f64) -> Observable {
    let values: Vec<f64> = (0..dim).map(|n| omega * (n as f64 + 0.5)).collect();
    Observable::from_real_diagonal(&values)
}

/// Pure qubit state with the given Bloch direction (normalized internally).
pub fn qubit_pure(bloch: [f64; 3]) -> Result<DensityOperator> {
    let r = (bloch[0].powi(2) + bloch[1].powi(2) + bloch[2].powi(2)).sqrt();
    if !(r > 0.0) {
        return Err(Error::InvalidState("zero Bloch vector".into()));
    }
    qubit_mixed([bloch[0] / r, bloch[1] / r, bloch[2] / r])
}

/// (I + r·σ)/2 for |r| ≤ 1.
pub fn qubit_mixed(bloch: [f64; 3]) -> Result<DensityOperator> {
    let [x, y, z] = bloch;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + z)),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            c(0.5 * (1.0 - z)),
        ],
    );
    DensityOperator::new(m)
}

/// Pure state whose level populations follow a Gaussian of the given mean
/// and standard deviation in m, with real non-negative amplitudes.
pub fn gaussian_level_state(levels: &[f64], mean: f64, std_dev: f64) -> Result<DensityOperator> {
    if !(std_dev > 0.0) {
        return Err(Error::OutOfRange(format!("std_dev {std_dev} must be > 0")));
    }
    let psi = CVector::from_iterator(
        levels.len(),
        levels.iter().map(|&m| {
            let z = (m - mean) / std_dev;
            c((-0.25 * z * z).exp())
        }),
    );
    DensityOperator::pure(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::trace_product;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        let i = C64::new(0.0, 1.0);
        let xy = commutator(x.matrix(), y.matrix());
        assert!((xy - z.matrix() * (i * 2.0)).norm() < 1e-15);
        assert!(
            (anticommutator(x.matrix(), x.matrix()) - CMatrix::identity(2, 2) * c(2.0)).norm()
                < 1e-15
        );
    }

    #[test]
    fn jz_levels_are_centered_integers() {
        let levels = jz_levels(50);
        assert_eq!(levels.first(), Some(&-25.0));
        assert_eq!(levels.last(), Some(&24.0));
        assert_eq!(jz(50).dim(), 50);
    }

    #[test]
    fn canonical_commutator_away_from_truncation() {
        let n = 12;
        let x = position(n);
        let p = momentum(n);
        let cm = commutator(x.matrix(), p.matrix());
        for k in 0..n - 1 {
            assert!((cm[(k, k)] - C64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_state_has_requested_population_spread() {
        let levels = jz_levels(50);
        let rho = gaussian_level_state(&levels, 0.0, 12.5f64.sqrt()).unwrap();
        let var = trace_product(rho.matrix(), &(jz(50).matrix() * jz(50).matrix()));
        assert!((var - 12.5).abs() < 1e-6, "variance {var}");
    }
}
