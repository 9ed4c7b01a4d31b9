//! Density operators, observables and their spectral decompositions.
//!
//! All matrices are dense and complex, in units with ħ = 1. A
//! [`DensityOperator`] can only be built through validating constructors, so
//! every value of the type is Hermitian, unit-trace and positive
//! semidefinite up to the tolerances below.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest tolerated elementwise |M - M†|.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Largest tolerated |tr ρ - 1|.
pub const TOL_TRACE: f64 = 1e-10;
/// Eigenvalues down to -TOL_PSD count as roundoff.
pub const TOL_PSD: f64 = 1e-9;
/// Eigenvalues below this are exact zeros in entropies and logarithms.
pub const EIG_FLOOR: f64 = 1e-14;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub(crate) fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Largest |m_ij| over off-diagonal entries.
pub(crate) fn off_diagonal_max(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Relative size below which matrix entries are zeroed before an
/// eigendecomposition.
pub const FLUSH_RELATIVE: f64 = 1e-30;

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Decomposes `m`, which is assumed Hermitian; only the Hermitian part is
    /// used. Entries below [`FLUSH_RELATIVE`] times the largest entry are
    /// zeroed first: the QR iteration squares entries and returns NaN once
    /// those squares underflow, and the flush moves eigenvalues by at most
    /// n·FLUSH_RELATIVE·max|m|.
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let mut h = hermitize(m);
        let scale = h.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let cutoff = FLUSH_RELATIVE * scale;
        for z in h.iter_mut() {
            if z.norm() < cutoff {
                *z = C64::new(0.0, 0.0);
            }
        }
        let eig = SymmetricEigen::new(h);
        let n = m.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σ f(λ_j) |j⟩⟨j|.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            self.eigenvectors[(i, j)] * f(self.eigenvalues[j])
        });
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    /// Frobenius norm of the reconstruction error against `m`.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        (self.reconstruct() - m).norm()
    }

    /// Populations ⟨j|ρ|j⟩ of `rho` in this eigenbasis.
    pub fn populations(&self, rho: &CMatrix) -> Vec<f64> {
        let v = &self.eigenvectors;
        (0..self.dim())
            .map(|j| {
                let col = v.column(j);
                (col.adjoint() * rho * col)[(0, 0)].re
            })
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Hermitian operator, used for observables and Hamiltonians.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "observable must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_error(&matrix);
        if herm > TOL_HERMITIAN {
            return Err(Error::InvalidState(format!(
                "observable is not Hermitian (|M - M†| = {herm:e})"
            )));
        }
        Ok(Self {
            matrix: hermitize(&matrix),
        })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x)));
        Self {
            matrix: CMatrix::from_diagonal(&diag),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        off_diagonal_max(&self.matrix) == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        SpectralDecomposition::of_hermitian(&self.matrix)
    }

    /// Operator norm ‖X‖, the largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.spectrum().operator_norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * c(factor),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates `matrix` against the density-operator invariants without
    /// modifying it (beyond symmetrizing roundoff below `TOL_HERMITIAN`).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::validate_shape(&matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > TOL_HERMITIAN {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (|M - M†| = {herm:e})"
            )));
        }
        let tr = trace_re(&matrix);
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let matrix = hermitize(&matrix);
        if !psd_within(&matrix, TOL_PSD) {
            let min = SpectralDecomposition::of_hermitian(&matrix).min();
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e} below -{TOL_PSD:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Hermitizes, renormalizes the trace and clips negative eigenvalues down
    /// to `-tolerance`; anything more negative is an error.
    pub fn repair(matrix: CMatrix, tolerance: f64) -> Result<Self> {
        Self::validate_shape(&matrix)?;
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let mut m = hermitize(&matrix);
        let tr = trace_re(&m);
        if !(tr > 0.0) {
            return Err(Error::InvalidState(format!("non-positive trace {tr}")));
        }
        m /= c(tr);
        if psd_within(&m, TOL_PSD) {
            return Ok(Self { matrix: m });
        }
        let spec = SpectralDecomposition::of_hermitian(&m);
        let min = spec.min();
        if min < -tolerance {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e} below repair tolerance -{tolerance:e}"
            )));
        }
        let kept: f64 = spec.eigenvalues.iter().map(|&x| x.max(0.0)).sum();
        let repaired = spec.apply(|x| x.max(0.0) / kept);
        Ok(Self {
            matrix: hermitize(&repaired),
        })
    }

    /// Hermitizes and renormalizes a matrix already known to be positive,
    /// such as the image of a state under a completely positive map.
    pub(crate) fn renormalized(mut m: CMatrix) -> Result<Self> {
        Self::validate_shape(&m)?;
        let n = m.nrows();
        let tr: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::InvalidState(format!(
                "non-positive or non-finite trace {tr}"
            )));
        }
        let inv = 1.0 / tr;
        let mut finite = true;
        for j in 0..n {
            for i in 0..j {
                let z = (m[(i, j)] + m[(j, i)].conj()) * (0.5 * inv);
                finite &= z.re.is_finite() && z.im.is_finite();
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
            m[(j, j)] = c(m[(j, j)].re * inv);
        }
        if !finite {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        Ok(Self { matrix: m })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) non-zero vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi = psi / c(norm);
        Ok(Self {
            matrix: hermitize(&(&psi * psi.adjoint())),
        })
    }

    /// |k⟩⟨k| in the computational basis.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::OutOfRange(format!("basis index {k} >= {dim}")));
        }
        let mut psi = CVector::zeros(dim);
        psi[k] = c(1.0);
        Self::pure(&psi)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) * c(1.0 / dim as f64),
        }
    }

    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(Observable::from_real_diagonal(probabilities).matrix)
    }

    fn validate_shape(m: &CMatrix) -> Result<()> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "density operator must be a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// tr(ρ X).
    pub fn expectation(&self, x: &Observable) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(trace_product(&self.matrix, x.matrix()))
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        SpectralDecomposition::of_hermitian(&self.matrix)
    }
}

/// Re tr(A B) without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// True when every eigenvalue of the Hermitian `m` is ≥ -tol.
/// Whether m + tol·I admits a Cholesky factorization with positive pivots.
/// nalgebra's complex Cholesky takes complex square roots of the pivots, so
/// the factorization is written out here to check the pivot sign.
fn psd_within(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + tol;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = c(d);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus() -> DensityOperator {
        DensityOperator::pure(&CVector::from_vec(vec![c(1.0), c(1.0)])).unwrap()
    }

    #[test]
    fn spectrum_survives_widely_ranging_entries() {
        // amplitudes fall from 1 to ~1e-200 across the levels; an unflushed
        // QR iteration returns inf/NaN eigenvalues for this state
        let levels: Vec<f64> = (0..50).map(f64::from).collect();
        let rho = crate::operators::gaussian_level_state(&levels, 19.0, 1.0).unwrap();
        let spec = rho.spectrum();
        assert!(spec.eigenvalues.iter().all(|x| x.is_finite()));
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((spec.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(spec.residual(rho.matrix()) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 1)] = c(0.1);
        assert!(matches!(
            DensityOperator::new(m),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        let m = CMatrix::identity(2, 2);
        assert!(DensityOperator::new(m).is_err());
        let neg = Observable::from_real_diagonal(&[1.1, -0.1])
            .matrix()
            .clone();
        assert!(DensityOperator::new(neg).is_err());
    }

    #[test]
    fn accepts_roundoff_negativity() {
        let m = Observable::from_real_diagonal(&[1.0 + 5e-10, -5e-10])
            .matrix()
            .clone();
        assert!(DensityOperator::new(m).is_ok());
    }

    #[test]
    fn repair_clips_within_tolerance_only() {
        let m = Observable::from_real_diagonal(&[1.0 + 1e-6, -1e-6])
            .matrix()
            .clone();
        assert!(DensityOperator::repair(m.clone(), TOL_PSD).is_err());
        let fixed = DensityOperator::repair(m, 1e-5).unwrap();
        let spec = fixed.spectrum();
        assert!(spec.min() >= -1e-15);
        assert!((trace_re(fixed.matrix()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn repair_renormalizes_trace() {
        let m = CMatrix::identity(3, 3);
        let rho = DensityOperator::repair(m, TOL_PSD).unwrap();
        assert_eq!(rho, DensityOperator::maximally_mixed(3));
    }

    #[test]
    fn spectral_decomposition_is_descending_and_reconstructs() {
        let rho = plus();
        let spec = rho.spectrum();
        assert!(spec.eigenvalues[0] >= spec.eigenvalues[1]);
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(spec.residual(rho.matrix()) < 1e-8 * 2.0);
    }

    #[test]
    fn observable_must_be_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(Observable::new(m).is_err());
        assert_eq!(Observable::identity(3).operator_norm(), 1.0);
    }
}
