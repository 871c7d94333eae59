//! Random operators for property tests and numerical cross-checks.
//!
//! Entries are drawn uniformly from the unit square; the resulting unitaries
//! are not Haar-distributed.

use rand::Rng;

use super::{ComplexMatrix, DensityOperator, C64, ZERO};

fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| random_complex(rng)).collect();
    ComplexMatrix::from_rows(rows, cols, entries).expect("dimensions are consistent")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n);
    g.add(&g.adjoint()).scale_real(0.5)
}

/// Gram-Schmidt orthonormalization of a random square matrix's columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let g = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
            for q in &cols {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        if ok {
            let mut u = ComplexMatrix::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for (i, &z) in col.iter().enumerate() {
                    u[(i, j)] = z;
                }
            }
            return u;
        }
    }
}

/// `G G† / tr(G G†)` for a random square `G`: full rank with probability one.
pub fn random_density_operator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let g = random_matrix(rng, n, n);
    let p = g.matmul(&g.adjoint());
    let tr = p.trace().re;
    let mut m = p.scale_real(1.0 / tr);
    // Clear rounding noise on the diagonal imaginary parts.
    for i in 0..n {
        m[(i, i)].im = 0.0;
    }
    let m = m.add(&m.adjoint()).scale_real(0.5);
    DensityOperator::new(m, vec![n]).expect("G G† is a valid state")
}

/// Random pure state of dimension `n`.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityOperator {
    let mut v: Vec<C64> = (0..n).map(|_| random_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        v = vec![ZERO; n];
        v[0] = C64::new(1.0, 0.0);
    } else {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    let m = ComplexMatrix::outer(&v, &v);
    DensityOperator::new(m, vec![n]).expect("projector onto a unit vector")
}
