//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. The operator-vector correspondence uses the
//! row-index-major convention `vec(|i><j|) = |i>|j>`, so that
//! `(A0 ⊗ A1) vec(B) = vec(A0 B A1ᵀ)` in the fixed computational basis.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, TwirlError};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance used to accept an input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TwirlError::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(TwirlError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `max |A_jk - B_jk|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `max_jk |A_jk - conj(A_kj)|`.
    pub fn hermiticity_violation(&self) -> Result<f64> {
        let d = self.require_square()?;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        Ok(worst)
    }

    /// Hermitian within `tol * max(1, max|A_jk|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        match self.hermiticity_violation() {
            Ok(v) => v <= tol * self.max_abs().max(1.0),
            Err(_) => false,
        }
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        let d = self.require_square()?;
        Ok(Self::from_fn(d, d, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5))
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(TwirlError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(TwirlError::Shape(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.require_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.try_sub(&other.matmul(self)?)
    }

    fn require_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(TwirlError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator sugar for conformable operands; shape errors panic here, use the
// `try_*`/`matmul` forms when shapes come from untrusted input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("non-conformable matrix product")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("shape mismatch in matrix sum")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("shape mismatch in matrix difference")
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, index: usize) -> Vec<C64> {
        (0..self.dim()).map(|r| self.eigenvectors[(r, index)]).collect()
    }

    /// `U f(Λ) U†` for a scalar function applied to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = self.dim();
        let u = &self.eigenvectors;
        let fvals: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(d, d, |r, c| {
            (0..d).map(|k| u[(r, k)] * fvals[k] * u[(c, k)].conj()).sum()
        })
    }

    /// `U diag(λ) U†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Every eigenvector is phase-fixed so that
/// its largest-magnitude component (first one on ties) is real and positive,
/// which makes the output deterministic for a fixed input.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let d = a.require_square()?;
    if d == 0 {
        return Err(TwirlError::Shape("empty matrix".into()));
    }
    let violation = a.hermiticity_violation()?;
    let tolerance = HERMITIAN_TOL * a.max_abs().max(1.0);
    if violation > tolerance {
        return Err(TwirlError::NotHermitian { violation, tolerance });
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(TwirlError::Eigen("matrix has non-finite entries".into()));
    }

    let sym = a.hermitian_part()?;
    let eig = sym.to_nalgebra().symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = v.iter().position(|z| z.norm() >= peak * (1.0 - 1e-12)).unwrap_or(0);
        let phase = if v[pivot].norm() > 0.0 { v[pivot].conj() / v[pivot].norm() } else { ONE };
        for r in 0..d {
            eigenvectors[(r, col)] = v[r] * phase / norm;
        }
        eigenvectors[(pivot, col)].im = 0.0;
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Row-major flattening: `vec(|i><j|) = |i>|j>`, i.e. entry `(i, j)` lands at
/// index `i * cols + j`.
pub fn vec(b: &ComplexMatrix) -> Vec<C64> {
    b.as_slice().to_vec()
}

/// Inverse of [`vec`] for a `d x d` matrix.
pub fn unvec(v: &[C64], d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(TwirlError::Shape(format!(
            "unvec to {d}x{d} needs {} entries, got {}",
            d * d,
            v.len()
        )));
    }
    ComplexMatrix::from_row_major(d, d, v.to_vec())
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    a.require_square()?;
    if a.is_hermitian(1e-14) {
        let eig = a.to_nalgebra().symmetric_eigen();
        return Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    let sv = a.to_nalgebra().singular_values();
    Ok(sv.iter().sum())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(a)?;
    Ok(eig.eigenvalues()[0])
}

pub mod pauli {
    //! Single-qubit Pauli matrices.
    use super::{ComplexMatrix, C64, ONE, ZERO};

    pub fn i2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eig_pauli_z() {
        let eig = eig_hermitian(&pauli::z()).unwrap();
        assert_eq!(eig.eigenvalues(), &[-1.0, 1.0]);
        // e1 then e0, phase-fixed to +1
        let u = eig.eigenvectors();
        assert!((u[(1, 0)] - ONE).norm() < 1e-15 && u[(0, 0)].norm() < 1e-15);
        assert!((u[(0, 1)] - ONE).norm() < 1e-15 && u[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn eig_pauli_x() {
        let eig = eig_hermitian(&pauli::x()).unwrap();
        assert!((eig.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = eig.eigenvector(0);
        let plus = eig.eigenvector(1);
        // up to phase: |<v, expected>| = 1
        let ov_minus = minus[0] * s - minus[1] * s;
        let ov_plus = plus[0] * s + plus[1] * s;
        assert!((ov_minus.norm() - 1.0).abs() < 1e-14);
        assert!((ov_plus.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian_and_non_square() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(TwirlError::NotHermitian { .. })));
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eig_hermitian(&b), Err(TwirlError::NotSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn eig_invariants_on_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &d in &[2usize, 3, 4, 8, 16] {
            for _ in 0..100 {
                let h = random_hermitian(d, 1.0, &mut rng);
                let eig = eig_hermitian(&h).unwrap();
                assert!(eig.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
                let scale = trace_norm(&h).unwrap().max(1.0);
                assert!(eig.reconstruct().max_abs_diff(&h).unwrap() <= 1e-10 * scale);
                let u = eig.eigenvectors();
                let gram = &u.adjoint() * u;
                assert!(gram.max_abs_diff(&ComplexMatrix::identity(d)).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn eig_is_deterministic_on_degenerate_input() {
        let h = kron(&pauli::z(), &ComplexMatrix::identity(2));
        let a = eig_hermitian(&h).unwrap();
        let b = eig_hermitian(&h.clone()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vec_matrix_units() {
        let mut e01 = ComplexMatrix::zeros(2, 2);
        e01[(0, 1)] = ONE;
        assert_eq!(vec(&e01), vec![ZERO, ONE, ZERO, ZERO]);
        assert_eq!(vec(&ComplexMatrix::identity(2)), vec![ONE, ZERO, ZERO, ONE]);
    }

    #[test]
    fn unvec_cases() {
        assert_eq!(unvec(&[ONE, ZERO, ZERO, ONE], 2).unwrap(), ComplexMatrix::identity(2));
        let mut e10 = ComplexMatrix::zeros(2, 2);
        e10[(1, 0)] = ONE;
        assert_eq!(unvec(&[ZERO, ZERO, ONE, ZERO], 2).unwrap(), e10);
        assert!(matches!(unvec(&[ONE; 5], 2), Err(TwirlError::Shape(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_matrix(4, 4, &mut rng);
        assert_eq!(unvec(&vec(&b), 4).unwrap(), b);
    }

    #[test]
    fn vec_correspondence_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a0 = random_matrix(3, 3, &mut rng);
            let a1 = random_matrix(3, 3, &mut rng);
            let b = random_matrix(3, 3, &mut rng);
            let lhs = kron(&a0, &a1).matvec(&vec(&b)).unwrap();
            let rhs = vec(&(&(&a0 * &b) * &a1.transpose()));
            let err = lhs.iter().zip(&rhs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "{err}");
        }
    }

    #[test]
    fn kron_cases() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let z = pauli::z();
        let k = &kron(&z, &i2) - &kron(&i2, &z.transpose());
        assert_eq!(k, ComplexMatrix::from_real_diagonal(&[0.0, 2.0, -2.0, 0.0]));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (a, b, c, d) = (
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
            random_matrix(2, 2, &mut rng),
        );
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn trace_norm_cases() {
        assert!((trace_norm(&ComplexMatrix::identity(4)).unwrap() - 4.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -3.0]);
        assert!((trace_norm(&d).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(trace_norm(&ComplexMatrix::zeros(2, 3)), Err(TwirlError::NotSquare { .. })));
    }

    #[test]
    fn trace_norm_unitary_invariance_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a = random_matrix(4, 4, &mut rng);
            let b = random_matrix(4, 4, &mut rng);
            let u = random_unitary(4, &mut rng);
            let v = random_unitary(4, &mut rng);
            let ta = trace_norm(&a).unwrap();
            assert!((trace_norm(&(&(&u * &a) * &v)).unwrap() - ta).abs() <= 1e-10);
            let tb = trace_norm(&b).unwrap();
            assert!(trace_norm(&(&a + &b)).unwrap() <= ta + tb + 1e-10);
        }
    }
}
