//! Seeded random operators for property sweeps.

use num_complex::Complex64;
use rand::Rng;

use crate::qops::{ComplexMatrix, DensityOperator, PovmElement, StateVector, ZERO};

fn entry<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Matrix with independent uniform entries in the unit square.
pub fn matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..dim * dim).map(|_| entry(rng)).collect();
    ComplexMatrix::from_row_slice(dim, &entries).unwrap()
}

/// Random Hermitian matrix (not necessarily positive).
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = matrix(rng, dim);
    g.try_add(&g.adjoint()).unwrap().scale_real(0.5)
}

/// Full-rank mixed state `G G^dagger / tr(G G^dagger)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let g = matrix(rng, dim);
    let gg = g.try_mul(&g.adjoint()).unwrap();
    let tr = gg.trace().re;
    let m = gg.scale_real(1.0 / tr);
    let m = m.try_add(&m.adjoint()).unwrap().scale_real(0.5);
    DensityOperator::new(m).expect("Ginibre construction yields a density operator")
}

/// Random pure state.
pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim).map(|_| entry(rng)).collect();
        if let Ok(s) = StateVector::normalized(amps) {
            return s;
        }
    }
}

/// Random effect `0 <= E <= I`, built as a density operator scaled by a
/// uniform factor in `[0, 1]`.
pub fn effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PovmElement {
    let rho = density(rng, dim);
    let s: f64 = rng.gen_range(0.0..1.0);
    PovmElement::new("e", rho.matrix().scale_real(s)).expect("scaled density is an effect")
}

/// Random unitary by Gram-Schmidt orthonormalization of the columns of a
/// random matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = matrix(rng, dim);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|r| g.get(r, c)).collect();
        // two passes keep the columns orthogonal to machine precision
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / n).collect());
    }
    let mut entries = vec![ZERO; dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            entries[r * dim + c] = *z;
        }
    }
    ComplexMatrix::from_row_slice(dim, &entries).unwrap()
}
