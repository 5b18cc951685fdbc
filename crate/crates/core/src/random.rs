//! Random instances for verification runs: Ginibre matrices, Haar-ish
//! unitaries, Hermitian operators and mixed states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{eig_hermitian, ComplexMatrix, C64};

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Hermitian matrix rescaled to the given spectral norm.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, spectral_norm: f64, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    let h = g.hermitian_part().expect("square");
    let eig = eig_hermitian(&h).expect("hermitian by construction");
    let norm = eig.eigenvalues().iter().map(|l| l.abs()).fold(0.0, f64::max);
    if norm == 0.0 {
        return h;
    }
    h.scale_real(spectral_norm / norm).hermitian_part().expect("square")
}

/// Unitary from Gram-Schmidt orthonormalisation of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for c in 0..d {
        let mut v: Vec<C64> = (0..d).map(|r| g[(r, c)]).collect();
        // two passes keep the basis orthonormal to machine precision
        for _ in 0..2 {
            for q in &cols {
                let ov: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= ov * y;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        cols.push(v);
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Full-rank mixed state `G G† / tr(G G†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = random_matrix(d, d, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale_real(1.0 / tr).hermitian_part().expect("square")
}

/// Sorted real spectrum drawn uniformly from `[-spread, spread]`.
pub fn random_spectrum<R: Rng + ?Sized>(d: usize, spread: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..=spread)).collect();
    v.sort_by(f64::total_cmp);
    v
}
