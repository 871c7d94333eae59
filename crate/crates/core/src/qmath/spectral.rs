use nalgebra::DMatrix;

use super::{ComplexMatrix, DensityOperator, C64};
use crate::error::{invalid, Result};

/// Eigenvalues at or below this are dropped from entropy sums.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;

const HERMITIAN_INPUT_TOL: f64 = 1e-10;
const BINARY_ENTROPY_SLACK: f64 = 1e-12;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
/// Column `k` of the returned matrix is the eigenvector for value `k`.
pub fn eigen_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(invalid("eigendecomposition needs a square matrix"));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_INPUT_TOL {
        return Err(invalid(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let n = m.rows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = DMatrix::<C64>::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = eig.eigenvectors[(row, k)];
        }
    }
    Ok((values, vectors))
}

pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    eigen_hermitian(m).map(|(values, _)| values)
}

/// `S(ρ) = -Σ λ log₂ λ` in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let spectrum =
        eigenvalues_hermitian(rho.matrix()).expect("DensityOperator is Hermitian by construction");
    let s: f64 = spectrum
        .into_iter()
        .filter(|&l| l > EIGENVALUE_CLAMP)
        .map(|l| -l * l.log2())
        .sum();
    s.max(0.0)
}

/// Shannon entropy of a Bernoulli(p) variable, in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !p.is_finite() || !(-BINARY_ENTROPY_SLACK..=1.0 + BINARY_ENTROPY_SLACK).contains(&p) {
        return Err(invalid(format!(
            "binary entropy argument {p} outside [0, 1]"
        )));
    }
    let p = p.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}
