//! Information-theoretic functionals of density operators. Logarithms are
//! natural throughout, so entropies are in nats.

use crate::error::{check_dim, Error, Result};
use crate::operators::commutator;
use crate::state::{trace_product, DensityOperator, Observable, SpectralDecomposition, EIG_FLOOR};

/// Purity above which a state counts as pure for [`relative_entropy_pure`].
pub const PURE_TOL: f64 = 1e-8;
/// Weight on the null space of σ beyond which S(ψ‖σ) is infinite.
pub const SUPPORT_TOL: f64 = 1e-10;

/// tr ρ².
pub fn purity(rho: &DensityOperator) -> f64 {
    rho.matrix()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .min(1.0)
}

pub fn entropy_of_spectrum(spec: &SpectralDecomposition) -> f64 {
    spec.eigenvalues
        .iter()
        .filter(|&&p| p >= EIG_FLOOR)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// S(ρ) = -tr ρ log ρ.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.spectrum())
}

pub fn surprise_second_moment_of_spectrum(spec: &SpectralDecomposition) -> f64 {
    spec.eigenvalues
        .iter()
        .filter(|&&p| p >= EIG_FLOOR)
        .map(|&p| p * p.ln().powi(2))
        .sum()
}

/// tr(ρ log² ρ), the second moment of the surprise -log p_j.
pub fn surprise_second_moment(rho: &DensityOperator) -> f64 {
    surprise_second_moment_of_spectrum(&rho.spectrum())
}

/// ‖ρ1 - ρ2‖₁ / 2.
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    check_dim(rho1.dim(), rho2.dim())?;
    let diff = rho1.matrix() - rho2.matrix();
    let spec = SpectralDecomposition::of_hermitian(&diff);
    let d = 0.5 * spec.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
    Ok(d.min(1.0))
}

/// S(ψ‖σ) = -⟨ψ| log σ |ψ⟩ for a pure first argument, evaluated through a
/// precomputed decomposition of σ. Returns `f64::INFINITY` when ψ has weight
/// above [`SUPPORT_TOL`] outside the support of σ.
pub fn relative_entropy_pure_with(
    psi: &DensityOperator,
    sigma: &SpectralDecomposition,
) -> Result<f64> {
    check_dim(sigma.dim(), psi.dim())?;
    let p = purity(psi);
    if p < 1.0 - PURE_TOL {
        return Err(Error::NotPure { purity: p });
    }
    let weights = sigma.populations(psi.matrix());
    let mut null_weight = 0.0;
    let mut value = 0.0;
    for (&lambda, &w) in sigma.eigenvalues.iter().zip(&weights) {
        if lambda < EIG_FLOOR {
            null_weight += w.max(0.0);
        } else {
            value -= w * lambda.ln();
        }
    }
    if null_weight > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(value.max(0.0))
}

/// Quantum relative entropy S(ψ‖σ) with a pure first argument.
pub fn relative_entropy_pure(psi: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(psi.dim(), sigma.dim())?;
    relative_entropy_pure_with(psi, &sigma.spectrum())
}

/// ‖[ρ, A]‖₂² = tr([ρ,A]†[ρ,A]).
pub fn commutator_2norm_sq(rho: &DensityOperator, a: &Observable) -> Result<f64> {
    check_dim(rho.dim(), a.dim())?;
    Ok(commutator(rho.matrix(), a.matrix())
        .iter()
        .map(|z| z.norm_sqr())
        .sum())
}

/// Re tr(ρ σ).
pub fn overlap(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok(trace_product(rho.matrix(), sigma.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{pauli_x, pauli_z, qubit_mixed, qubit_pure};
    use crate::state::{c, CVector};
    use std::f64::consts::LN_2;

    fn zero() -> DensityOperator {
        DensityOperator::basis(2, 0).unwrap()
    }
    fn one() -> DensityOperator {
        DensityOperator::basis(2, 1).unwrap()
    }
    fn plus() -> DensityOperator {
        qubit_pure([1.0, 0.0, 0.0]).unwrap()
    }
    fn diag_3_1() -> DensityOperator {
        DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    // Independent scalar oracle for spectra given explicitly.
    fn shannon(ps: &[f64]) -> f64 {
        ps.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum()
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&plus()) - 1.0).abs() < 1e-12);
        assert!((purity(&DensityOperator::maximally_mixed(4)) - 0.25).abs() < 1e-15);
        assert!((purity(&diag_3_1()) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&plus()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(2)) - LN_2).abs() < 1e-12);
        let expected = shannon(&[0.75, 0.25]);
        assert!((expected - 0.562_335_144_618_808_3).abs() < 1e-15);
        assert!((von_neumann_entropy(&diag_3_1()) - expected).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        assert_eq!(trace_distance(&plus(), &plus()).unwrap(), 0.0);
        assert!((trace_distance(&zero(), &one()).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((trace_distance(&plus(), &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            trace_distance(&plus(), &DensityOperator::maximally_mixed(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn relative_entropy_examples() {
        assert!(relative_entropy_pure(&zero(), &zero()).unwrap().abs() < 1e-12);
        let r = relative_entropy_pure(&zero(), &DensityOperator::maximally_mixed(2)).unwrap();
        assert!((r - LN_2).abs() < 1e-12);
        assert_eq!(
            relative_entropy_pure(&zero(), &one()).unwrap(),
            f64::INFINITY
        );
        assert!(matches!(
            relative_entropy_pure(&diag_3_1(), &zero()),
            Err(Error::NotPure { .. })
        ));
    }

    #[test]
    fn surprise_moment_examples() {
        assert!(surprise_second_moment(&plus()).abs() < 1e-12);
        let mm = surprise_second_moment(&DensityOperator::maximally_mixed(2));
        assert!((mm - LN_2 * LN_2).abs() < 1e-12);
        let oracle = 0.75 * 0.75f64.ln().powi(2) + 0.25 * 0.25f64.ln().powi(2);
        assert!((oracle - 0.542_523_745_025_815_1).abs() < 1e-15);
        assert!((surprise_second_moment(&diag_3_1()) - oracle).abs() < 1e-12);
    }

    #[test]
    fn commutator_norm_examples() {
        let z = pauli_z();
        assert_eq!(commutator_2norm_sq(&diag_3_1(), &z).unwrap(), 0.0);
        // [|+⟩⟨+|, σ_z] = [[0, -1], [1, 0]]
        assert!((commutator_2norm_sq(&plus(), &z).unwrap() - 2.0).abs() < 1e-12);
        let mm = DensityOperator::maximally_mixed(2);
        assert!(commutator_2norm_sq(&mm, &pauli_x()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pure_overlap_identity() {
        let psi = DensityOperator::pure(&CVector::from_vec(vec![c(0.6), c(0.8)])).unwrap();
        let sigma = qubit_mixed([0.1, 0.2, -0.3]).unwrap();
        let f = overlap(&psi, &sigma).unwrap();
        let d = trace_distance(&psi, &sigma).unwrap();
        assert!(1.0 - f <= d + 1e-12 && d <= (1.0 - f).sqrt() + 1e-12);
    }
}
