use serde::Serialize;

use super::{eigenvalues_hermitian, ComplexMatrix, StateVector};
use crate::error::{invalid, Result};

/// A Hermitian, unit-trace, positive semidefinite operator together with the
/// tensor-factor layout of the space it acts on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    factor_dims: Vec<usize>,
}

impl DensityOperator {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const TRACE_IMAG_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    /// Validates every invariant, including positivity (one eigensolve).
    pub fn new(matrix: ComplexMatrix, factor_dims: Vec<usize>) -> Result<Self> {
        check_layout(&matrix, &factor_dims)?;
        let defect = matrix.hermiticity_defect();
        if defect > Self::HERMITIAN_TOL {
            return Err(invalid(format!(
                "density operator not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_IMAG_TOL {
            return Err(invalid(format!("density operator trace {tr} is not 1")));
        }
        let spectrum = eigenvalues_hermitian(&matrix)?;
        let smallest = spectrum.last().copied().unwrap_or(0.0);
        if smallest < -Self::PSD_TOL {
            return Err(invalid(format!(
                "density operator has negative eigenvalue {smallest:e}"
            )));
        }
        Ok(Self {
            matrix,
            factor_dims,
        })
    }

    /// Pure state `|ψ><ψ|` of a normalized ket.
    pub fn from_pure(state: &StateVector, factor_dims: Vec<usize>) -> Result<Self> {
        if !state.is_normalized() {
            return Err(invalid("pure density operator needs a normalized ket"));
        }
        Self::new(state.projector(), factor_dims)
    }

    /// Normalizes a positive operator of nonzero trace to unit trace.
    pub fn normalized(matrix: ComplexMatrix, factor_dims: Vec<usize>) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr <= 0.0 {
            return Err(invalid(
                "cannot normalize an operator with non-positive trace",
            ));
        }
        Self::new(matrix.scale_real(1.0 / tr), factor_dims)
    }

    /// Maximally mixed state on the given layout.
    pub fn maximally_mixed(factor_dims: Vec<usize>) -> Self {
        let n: usize = factor_dims.iter().product();
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            factor_dims,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Product state `self ⊗ other`, concatenating the factor layouts.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        Self {
            matrix: super::tensor(&self.matrix, &other.matrix),
            factor_dims,
        }
    }

    /// Convex combination `Σ w_k ρ_k`. Weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| invalid("mixture needs at least one component"))?;
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        let mut total = 0.0;
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(invalid("mixture weights must be non-negative"));
            }
            if rho.factor_dims != first.factor_dims {
                return Err(invalid("mixture components have different layouts"));
            }
            acc = acc.add(&rho.matrix.scale_real(*w));
            total += w;
        }
        if (total - 1.0).abs() > Self::TRACE_TOL {
            return Err(invalid(format!("mixture weights sum to {total}, not 1")));
        }
        Self::new(acc, first.factor_dims.clone())
    }
}

fn check_layout(matrix: &ComplexMatrix, factor_dims: &[usize]) -> Result<()> {
    if !matrix.is_square() {
        return Err(invalid("density operator must be square"));
    }
    if factor_dims.is_empty() || factor_dims.contains(&0) {
        return Err(invalid("factor dimensions must be positive"));
    }
    let product: usize = factor_dims.iter().product();
    if product != matrix.rows() {
        return Err(invalid(format!(
            "factor dims {factor_dims:?} do not multiply to matrix dimension {}",
            matrix.rows()
        )));
    }
    Ok(())
}

/// Traces out every factor not listed in `keep`. The kept factors retain their
/// original relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.factor_dims();
    if keep.is_empty() {
        return Err(invalid("partial trace must keep at least one factor"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(invalid(format!("duplicate factor index in {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(invalid(format!(
            "factor index {bad} out of range for layout {dims:?}"
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let kept_size: usize = kept_dims.iter().product();
    let traced_size: usize = traced.iter().map(|&t| dims[t]).product();

    // Row-major strides of the full layout.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |factors: &[usize], multi: usize| -> usize {
        let mut rem = multi;
        let mut idx = 0;
        for &f in factors.iter().rev() {
            idx += (rem % dims[f]) * strides[f];
            rem /= dims[f];
        }
        idx
    };

    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(kept_size, kept_size);
    for a in 0..kept_size {
        let row_base = offset(&kept, a);
        for b in 0..kept_size {
            let col_base = offset(&kept, b);
            let mut acc = super::ZERO;
            for t in 0..traced_size {
                let shift = offset(&traced, t);
                acc += m[(row_base + shift, col_base + shift)];
            }
            out[(a, b)] = acc;
        }
    }
    DensityOperator::new(out, kept_dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::random::random_density_operator;
    use crate::qmath::{re, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phi_plus() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ket = StateVector::new(vec![re(h), ZERO, ZERO, re(h)]).unwrap();
        DensityOperator::from_pure(&ket, vec![2, 2]).unwrap()
    }

    #[test]
    fn tracing_bell_pair_gives_maximally_mixed() {
        let reduced = partial_trace(&phi_plus(), &[0]).unwrap();
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(reduced.matrix().max_abs_diff(&half) < 1e-15);
        let reduced = partial_trace(&phi_plus(), &[1]).unwrap();
        assert!(reduced.matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density_operator(&mut rng, 2);
        let b = random_density_operator(&mut rng, 3);
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, &[0]).unwrap();
        let rb = partial_trace(&ab, &[1]).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()) < 1e-14);
        assert!(rb.matrix().max_abs_diff(b.matrix()) < 1e-14);
        assert_eq!(rb.factor_dims(), &[3]);
    }

    #[test]
    fn trace_preserved_on_random_2x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let rho = random_density_operator(&mut rng, 6);
            let rho = DensityOperator::new(rho.into_matrix(), vec![2, 3]).unwrap();
            for keep in [[0usize], [1]] {
                let r = partial_trace(&rho, &keep).unwrap();
                assert!((r.matrix().trace().re - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn keeping_everything_is_identity_map() {
        let rho = phi_plus();
        let same = partial_trace(&rho, &[0, 1]).unwrap();
        assert_eq!(same.matrix(), rho.matrix());
    }

    #[test]
    fn invalid_factor_indices_rejected() {
        let rho = phi_plus();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn invariants_enforced() {
        let not_hermitian = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(DensityOperator::new(not_hermitian, vec![2]).is_err());
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.6]);
        assert!(DensityOperator::new(bad_trace, vec![2]).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityOperator::new(negative, vec![2]).is_err());
        let bad_layout = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(DensityOperator::new(bad_layout, vec![3]).is_err());
    }
}
