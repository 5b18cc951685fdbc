use crate::error::Result;
use crate::linalg::{eig_hermitian, ComplexMatrix, SpectralDecomposition, C64};

/// A Hermitian operator together with its cached spectral decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: SpectralDecomposition,
}

impl HermitianOperator {
    /// Validates Hermiticity and diagonalises. The stored matrix is the
    /// exactly Hermitian part of the input.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let spectrum = eig_hermitian(&matrix)?;
        let matrix = matrix.hermitian_part()?;
        Ok(Self { matrix, spectrum })
    }

    /// Real diagonal operator `diag(λ)`.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(eigenvalues))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        self.spectrum.eigenvectors()
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// `e^{-iHs}`.
    pub fn evolution(&self, s: f64) -> ComplexMatrix {
        self.spectrum.map_spectrum(|l| C64::from_polar(1.0, -l * s))
    }

    /// `e^{-iHs} X e^{iHs}`, computed in the eigenbasis.
    pub fn conjugate(&self, x: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
        let y = self.to_eigenbasis(x)?;
        let l = self.eigenvalues();
        let d = self.dim();
        let phases: Vec<C64> = l.iter().map(|&lj| C64::from_polar(1.0, -lj * s)).collect();
        let rotated = ComplexMatrix::from_fn(d, d, |j, k| y[(j, k)] * phases[j] * phases[k].conj());
        self.from_eigenbasis(&rotated)
    }

    /// `V† X V`, the matrix of `X` in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = self.eigenvectors();
        v.adjoint().matmul(x)?.matmul(v)
    }

    /// `V Y V†`.
    pub fn from_eigenbasis(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = self.eigenvectors();
        v.matmul(y)?.matmul(&v.adjoint())
    }

    /// Pairwise-difference matrix `[λ_j − λ_k]`.
    pub fn gaps(&self) -> Vec<Vec<f64>> {
        let l = self.eigenvalues();
        l.iter().map(|&a| l.iter().map(|&b| a - b).collect()).collect()
    }
}
