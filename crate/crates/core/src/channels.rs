//! States, channel representations and the Schur-map CPTP criteria.
//!
//! Choi matrices use the unnormalised convention
//! `J(Φ) = Σ_ij |i><j| ⊗ Φ(|i><j|)`, so a trace-preserving map has
//! `Tr_2 J = I` and `tr J = d`.

use crate::error::{Result, TwirlError};
use crate::hamiltonian::HermitianOperator;
use crate::linalg::{self, kron, trace_norm, unvec, vec, ComplexMatrix, C64, ONE, ZERO};

/// Tolerance on Hermiticity, unit trace and positivity of a density matrix.
pub const STATE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite for a multiplier or
/// a sampled Choi matrix.
pub const PSD_TOL: f64 = 1e-9;
/// Largest accepted `|m_jj − 1|` for a trace-preserving Schur multiplier.
pub const TP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`STATE_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.require_square()?;
        if d == 0 {
            return Err(TwirlError::InvalidState("empty matrix".into()));
        }
        let herm = matrix.hermiticity_violation()?;
        if herm > STATE_TOL {
            return Err(TwirlError::InvalidState(format!("not Hermitian (violation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(TwirlError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = linalg::min_eigenvalue(&matrix)?;
        if min_eig < -STATE_TOL {
            return Err(TwirlError::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a channel output without re-validating it.
    pub(crate) fn from_channel_output(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ><ψ|` for a normalised pure state.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(TwirlError::InvalidState("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    /// Computational basis state `|index><index|`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(TwirlError::InvalidState(format!("basis index {index} out of range for dimension {d}")));
        }
        let mut m = ComplexMatrix::zeros(d, d);
        m[(index, index)] = ONE;
        Ok(Self { matrix: m })
    }

    /// `|+…+><+…+|` on `qubits` qubits.
    pub fn plus_all(qubits: usize) -> Self {
        let d = 1usize << qubits;
        let v = C64::new(1.0 / d as f64, 0.0);
        Self { matrix: ComplexMatrix::from_fn(d, d, |_, _| v) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A linear map on `d x d` matrices as a `d² x d²` matrix acting on `vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperoperatorMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl SuperoperatorMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(TwirlError::Shape(format!(
                "superoperator on dimension {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    /// Tabulates a map by its action on matrix units.
    pub fn from_map(dim: usize, f: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for i in 0..dim {
            for j in 0..dim {
                let mut unit = ComplexMatrix::zeros(dim, dim);
                unit[(i, j)] = ONE;
                let image = vec(&f(&unit)?);
                if image.len() != n {
                    return Err(TwirlError::Shape("map changed the dimension".into()));
                }
                for (r, z) in image.into_iter().enumerate() {
                    matrix[(r, i * dim + j)] = z;
                }
            }
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    /// `X ↦ U X U†`, i.e. `U ⊗ Ū`.
    pub fn unitary_conjugation(u: &ComplexMatrix) -> Result<Self> {
        let d = u.require_square()?;
        Ok(Self { dim: d, matrix: kron(u, &u.conj()) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(TwirlError::Shape(format!(
                "superoperator on dimension {} applied to {}x{}",
                self.dim,
                x.rows(),
                x.cols()
            )));
        }
        unvec(&self.matrix.matvec(&vec(x))?, self.dim)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_channel_output(self.apply_matrix(rho.matrix())?))
    }

    /// Superoperator of `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.dim != inner.dim {
            return Err(TwirlError::Shape(format!("cannot compose dimensions {} and {}", self.dim, inner.dim)));
        }
        Ok(Self { dim: self.dim, matrix: self.matrix.matmul(&inner.matrix)? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

/// Complete-positivity and trace-preservation diagnostics of a Choi matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiReport {
    pub min_eigenvalue: f64,
    pub partial_trace_deviation: f64,
}

impl ChoiMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(TwirlError::Shape(format!(
                "Choi matrix on dimension {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr_2 J`, which is the identity for trace-preserving maps.
    pub fn partial_trace_second(&self) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d, d, |i, j| (0..d).map(|a| self.matrix[(i * d + a, j * d + a)]).sum())
    }

    /// `Φ(ρ) = Σ_ij ρ_ij Φ(|i><j|)` read off the blocks of `J`.
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        if x.rows() != d || x.cols() != d {
            return Err(TwirlError::Shape(format!("Choi matrix on dimension {d} applied to {}x{}", x.rows(), x.cols())));
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let xij = x[(i, j)];
                if xij == ZERO {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        out[(a, b)] += xij * self.matrix[(i * d + a, j * d + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_channel_output(self.apply_matrix(rho.matrix())?))
    }

    pub fn report(&self) -> Result<ChoiReport> {
        let min_eigenvalue = linalg::min_eigenvalue(&self.matrix.hermitian_part()?)?;
        let partial_trace_deviation =
            self.partial_trace_second().max_abs_diff(&ComplexMatrix::identity(self.dim))?;
        Ok(ChoiReport { min_eigenvalue, partial_trace_deviation })
    }
}

/// Reshuffles a superoperator into its Choi matrix:
/// `J[(i,a),(j,b)] = Φ(|i><j|)_ab = S[(a,b),(i,j)]`.
pub fn choi_of_superoperator(s: &SuperoperatorMatrix) -> ChoiMatrix {
    let d = s.dim;
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for jj in 0..d {
            for a in 0..d {
                for b in 0..d {
                    j[(i * d + a, jj * d + b)] = s.matrix[(a * d + b, i * d + jj)];
                }
            }
        }
    }
    ChoiMatrix { dim: d, matrix: j }
}

/// `‖J(Φ) − J(Ψ)‖₁`. With the unnormalised convention this satisfies
/// `value / d ≤ ‖Φ − Ψ‖◇ ≤ value`.
pub fn choi_trace_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(TwirlError::Shape(format!("Choi dimensions {} and {} differ", a.dim, b.dim)));
    }
    trace_norm(&a.matrix.try_sub(&b.matrix)?)
}

/// `½‖ρ − σ‖₁`.
pub fn state_trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(TwirlError::Shape(format!("state dimensions {} and {} differ", a.dim(), b.dim())));
    }
    Ok(0.5 * trace_norm(&a.matrix.try_sub(&b.matrix)?)?)
}

/// A map acting by entrywise multiplication in a fixed orthonormal basis:
/// `X ↦ V (M ⊙ V†XV) V†`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurMultiplier {
    basis: ComplexMatrix,
    multiplier: ComplexMatrix,
}

/// Result of [`cptp_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    pub is_cp: bool,
    pub is_tp: bool,
    /// Smallest eigenvalue of the Hermitian part of the multiplier. A
    /// non-Hermitian multiplier is never reported as CP.
    pub min_eigenvalue: f64,
    pub max_diag_deviation: f64,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.is_cp && self.is_tp
    }
}

impl SchurMultiplier {
    /// `basis` is the unitary whose columns span the Schur basis. CPTP is not
    /// enforced here; see [`cptp_check`].
    pub fn new(basis: ComplexMatrix, multiplier: ComplexMatrix) -> Result<Self> {
        let d = basis.require_square()?;
        if multiplier.rows() != d || multiplier.cols() != d {
            return Err(TwirlError::Shape(format!(
                "multiplier is {}x{} but basis has dimension {d}",
                multiplier.rows(),
                multiplier.cols()
            )));
        }
        Ok(Self { basis, multiplier })
    }

    /// Multiplier `m_jk = f(λ_j − λ_k)` in the eigenbasis of `h`.
    pub fn from_gap_function(h: &HermitianOperator, f: impl Fn(f64) -> C64) -> Self {
        let l = h.eigenvalues();
        let d = h.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                m[(j, k)] = if j == k { f(0.0) } else { f(l[j] - l[k]) };
            }
        }
        Self { basis: h.eigenvectors().clone(), multiplier: m }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn multiplier(&self) -> &ComplexMatrix {
        &self.multiplier
    }

    pub fn apply_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = &self.basis;
        let y = v.adjoint().matmul(x)?.matmul(v)?.hadamard(&self.multiplier)?;
        v.matmul(&y)?.matmul(&v.adjoint())
    }

    /// Multiplier of `self` followed by `other` in the same basis.
    pub fn then(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(TwirlError::Shape("Schur multipliers act in different bases".into()));
        }
        Ok(Self { basis: self.basis.clone(), multiplier: self.multiplier.hadamard(&other.multiplier)? })
    }

    pub fn superoperator(&self) -> Result<SuperoperatorMatrix> {
        SuperoperatorMatrix::from_map(self.dim(), |x| self.apply_matrix(x))
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        Ok(choi_of_superoperator(&self.superoperator()?))
    }
}

/// Applies a Schur multiplier to a state. A multiplier failing
/// [`cptp_check`] is still applied; a warning is logged.
pub fn apply_schur(m: &SchurMultiplier, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if m.dim() != rho.dim() {
        return Err(TwirlError::Shape(format!(
            "multiplier dimension {} vs state dimension {}",
            m.dim(),
            rho.dim()
        )));
    }
    let report = cptp_check(m);
    if !report.is_cptp() {
        log::warn!(
            "applying a non-CPTP Schur multiplier (min eigenvalue {:.3e}, max diagonal deviation {:.3e})",
            report.min_eigenvalue,
            report.max_diag_deviation
        );
    }
    Ok(DensityMatrix::from_channel_output(m.apply_matrix(rho.matrix())?))
}

/// A Schur map is CP iff its multiplier is PSD and TP iff its diagonal is all ones.
pub fn cptp_check(m: &SchurMultiplier) -> CptpReport {
    let mult = &m.multiplier;
    let max_diag_deviation = mult.diagonal().iter().map(|z| (z - ONE).norm()).fold(0.0, f64::max);
    let hermitian = mult.is_hermitian(1e-12);
    let min_eigenvalue = mult
        .hermitian_part()
        .and_then(|h| linalg::min_eigenvalue(&h))
        .unwrap_or(f64::NEG_INFINITY);
    CptpReport {
        is_cp: hermitian && min_eigenvalue >= -PSD_TOL,
        is_tp: max_diag_deviation <= TP_TOL,
        min_eigenvalue,
        max_diag_deviation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::random::{random_density_matrix, random_spectrum, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> DensityMatrix {
        DensityMatrix::plus_all(1)
    }

    fn z_multiplier(off: f64) -> SchurMultiplier {
        let h = HermitianOperator::new(pauli::z()).unwrap();
        SchurMultiplier::from_gap_function(&h, |w| if w == 0.0 { ONE } else { C64::new(off, 0.0) })
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.0, 0.5]).unwrap()).is_err());
        assert!(DensityMatrix::basis(2, 2).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(3).into_matrix()).is_ok());
    }

    #[test]
    fn all_ones_multiplier_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let d = 3;
            let rho = DensityMatrix::new(random_density_matrix(d, &mut rng)).unwrap();
            let m = SchurMultiplier::new(random_unitary(d, &mut rng), ComplexMatrix::from_fn(d, d, |_, _| ONE)).unwrap();
            let out = apply_schur(&m, &rho).unwrap();
            assert!(out.matrix().max_abs_diff(rho.matrix()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn complete_dephasing() {
        let rho = DensityMatrix::new(ComplexMatrix::from_real(2, 2, &[0.6, 0.3, 0.3, 0.4]).unwrap()).unwrap();
        let out = apply_schur(&z_multiplier(0.0), &rho).unwrap();
        assert_eq!(out.matrix(), &ComplexMatrix::from_real_diagonal(&[0.6, 0.4]));
    }

    #[test]
    fn partial_dephasing_of_plus_state() {
        let e2 = (-2.0f64).exp();
        let out = apply_schur(&z_multiplier(e2), &plus()).unwrap();
        assert!((out.matrix()[(0, 1)].re - 0.5 * e2).abs() < 1e-15);
        assert!((out.matrix()[(0, 1)].re - 0.067_667_641_618_306_35).abs() < 1e-15);
        assert!((out.matrix()[(1, 0)].re - 0.5 * e2).abs() < 1e-15);
    }

    #[test]
    fn apply_schur_shape_error() {
        assert!(matches!(apply_schur(&z_multiplier(1.0), &DensityMatrix::maximally_mixed(3)), Err(TwirlError::Shape(_))));
    }

    #[test]
    fn cptp_check_cases() {
        let ones = SchurMultiplier::new(ComplexMatrix::identity(3), ComplexMatrix::from_fn(3, 3, |_, _| ONE)).unwrap();
        let r = cptp_check(&ones);
        assert!(r.is_cp && r.is_tp);

        let mut bad = ComplexMatrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
        bad[(0, 0)] = ONE;
        bad[(1, 1)] = C64::new(0.9, 0.0);
        let r = cptp_check(&SchurMultiplier::new(ComplexMatrix::identity(2), bad).unwrap());
        assert!(!r.is_tp);
        assert!((r.max_diag_deviation - 0.1).abs() < 1e-15);

        let not_psd = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        let r = cptp_check(&SchurMultiplier::new(ComplexMatrix::identity(2), not_psd).unwrap());
        assert!(!r.is_cp && r.is_tp);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_multiplier_is_cptp_on_random_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..100 {
            let d = 2 + trial % 7;
            let l = random_spectrum(d, 3.0, &mut rng);
            let t = (trial as f64) * 0.05;
            let h = HermitianOperator::diagonal(&l).unwrap();
            let m = SchurMultiplier::from_gap_function(&h, |w| C64::new((-t * w * w / 2.0).exp(), 0.0));
            assert!(cptp_check(&m).is_cptp(), "trial {trial}");
        }
    }

    #[test]
    fn choi_of_identity() {
        let j = choi_of_superoperator(&SuperoperatorMatrix::identity(2));
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.],
        )
        .unwrap();
        assert_eq!(j.matrix(), &expected);
        let rep = j.report().unwrap();
        assert!(rep.min_eigenvalue > -1e-12 && rep.partial_trace_deviation < 1e-15);
    }

    #[test]
    fn choi_of_z_conjugation_negates_off_blocks() {
        let s = SuperoperatorMatrix::unitary_conjugation(&pauli::z()).unwrap();
        let j = choi_of_superoperator(&s);
        // J = Σ |i><j| ⊗ Z|i><j|Z; the (0,1) and (1,0) blocks pick up a sign.
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 0., 0., -1., 0., 0., 1.],
        )
        .unwrap();
        assert_eq!(j.matrix(), &expected);
    }

    #[test]
    fn choi_of_dephasing_is_diagonal() {
        let j = z_multiplier(0.0).choi().unwrap();
        assert_eq!(j.matrix(), &ComplexMatrix::from_real_diagonal(&[1., 0., 0., 1.]));
    }

    #[test]
    fn choi_distance_identity_vs_dephasing() {
        let id = choi_of_superoperator(&SuperoperatorMatrix::identity(2));
        let deph = z_multiplier(0.0).choi().unwrap();
        assert_eq!(choi_trace_distance(&id, &id).unwrap(), 0.0);
        assert!((choi_trace_distance(&id, &deph).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn choi_apply_matches_superoperator() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_unitary(3, &mut rng);
        let s = SuperoperatorMatrix::unitary_conjugation(&u).unwrap();
        let rho = random_density_matrix(3, &mut rng);
        let a = s.apply_matrix(&rho).unwrap();
        let b = choi_of_superoperator(&s).apply_matrix(&rho).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
        let direct = &(&u * &rho) * &u.adjoint();
        assert!(a.max_abs_diff(&direct).unwrap() < 1e-14);
    }

    #[test]
    fn state_distances() {
        let a = DensityMatrix::basis(2, 0).unwrap();
        let b = DensityMatrix::basis(2, 1).unwrap();
        assert_eq!(state_trace_distance(&a, &a).unwrap(), 0.0);
        assert!((state_trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let e2 = (-2.0f64).exp();
        let deph = apply_schur(&z_multiplier(e2), &plus()).unwrap();
        let d = state_trace_distance(&plus(), &deph).unwrap();
        assert!((d - (1.0 - e2) / 2.0).abs() < 1e-15);
        assert!((d - 0.432_332_358_381_693_65).abs() < 1e-14);
    }

    #[test]
    fn superoperator_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let u = random_unitary(3, &mut rng);
            let phi = SuperoperatorMatrix::unitary_conjugation(&u).unwrap();
            let h = HermitianOperator::diagonal(&random_spectrum(3, 1.0, &mut rng)).unwrap();
            let psi = SchurMultiplier::from_gap_function(&h, |w| C64::new((-w * w).exp(), 0.0)).superoperator().unwrap();
            let composed = SuperoperatorMatrix::from_map(3, |x| phi.apply_matrix(&psi.apply_matrix(x)?)).unwrap();
            assert!(phi.compose(&psi).unwrap().matrix().max_abs_diff(composed.matrix()).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn choi_distance_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let chans: Vec<ChoiMatrix> = (0..3)
                .map(|_| choi_of_superoperator(&SuperoperatorMatrix::unitary_conjugation(&random_unitary(2, &mut rng)).unwrap()))
                .collect();
            let ab = choi_trace_distance(&chans[0], &chans[1]).unwrap();
            let bc = choi_trace_distance(&chans[1], &chans[2]).unwrap();
            let ac = choi_trace_distance(&chans[0], &chans[2]).unwrap();
            assert!(ac <= ab + bc + 1e-9);
        }
    }
}
