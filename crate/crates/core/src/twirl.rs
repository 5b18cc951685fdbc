//! Exact Hamiltonian twirling channels.
//!
//! A twirl `ρ ↦ E_{s∼D}[e^{-iHs} ρ e^{iHs}]` is a Schur channel in the
//! eigenbasis of `H` with multiplier `m_jk = char_minus(λ_j − λ_k)`. The
//! Gaussian twirl of variance `t` is `e^{tL}` for the single-jump Lindbladian
//! `L(ρ) = HρH − ½{H², ρ}`; the vectorised oracle and the Gauss–Hermite check
//! evaluate the same object by independent routes.

use std::sync::OnceLock;

use crate::channels::{apply_schur, choi_of_superoperator, ChoiMatrix, DensityMatrix, SchurMultiplier, SuperoperatorMatrix};
use crate::distribution::{levy_psi, validate_jump_law, DistributionSpec, LevyTriplet};
use crate::error::{Result, TwirlError};
use crate::hamiltonian::HermitianOperator;
use crate::linalg::{eig_hermitian, kron, unvec, vec, ComplexMatrix, C64, ONE};
use crate::quadrature::gauss_hermite;

/// Largest commutator entry accepted for "commuting" jump operators.
pub const COMMUTATION_TOL: f64 = 1e-10;

/// The twirl of `H` by a law `D`, with its Schur multiplier assembled on first use.
#[derive(Debug)]
pub struct TwirlChannel {
    hamiltonian: HermitianOperator,
    dist: DistributionSpec,
    multiplier: OnceLock<SchurMultiplier>,
}

impl Clone for TwirlChannel {
    fn clone(&self) -> Self {
        let multiplier = OnceLock::new();
        if let Some(m) = self.multiplier.get() {
            let _ = multiplier.set(m.clone());
        }
        Self { hamiltonian: self.hamiltonian.clone(), dist: self.dist.clone(), multiplier }
    }
}

impl TwirlChannel {
    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn distribution(&self) -> &DistributionSpec {
        &self.dist
    }

    pub fn multiplier(&self) -> &SchurMultiplier {
        self.multiplier
            .get_or_init(|| SchurMultiplier::from_gap_function(&self.hamiltonian, |w| self.dist.char_minus(w)))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_schur(self.multiplier(), rho)
    }

    pub fn superoperator(&self) -> Result<SuperoperatorMatrix> {
        self.multiplier().superoperator()
    }
}

/// Builds the twirl channel of `h` by `dist`.
pub fn exact_channel(h: &HermitianOperator, dist: &DistributionSpec) -> Result<TwirlChannel> {
    dist.validate()?;
    Ok(TwirlChannel { hamiltonian: h.clone(), dist: dist.clone(), multiplier: OnceLock::new() })
}

fn require_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(TwirlError::Domain(format!("evolution time must be finite and nonnegative, got {t}")))
    }
}

/// `e^{tL}(ρ)` for `L(ρ) = HρH − ½{H², ρ}`, as the Gaussian twirl of variance `t`.
/// At `t = 0` the input is returned unchanged.
pub fn gaussian_evolution(h: &HermitianOperator, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    require_time(t)?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    exact_channel(h, &DistributionSpec::Gaussian { variance: t })?.apply(rho)
}

/// `K = H ⊗ I − I ⊗ Hᵀ`, the vectorised commutator.
pub fn commutator_generator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = h.require_square()?;
    let id = ComplexMatrix::identity(d);
    kron(h, &id).try_sub(&kron(&id, &h.transpose()))
}

/// `unvec(exp(−K²t/2) vec(ρ))`, with the exponential taken through the
/// eigendecomposition of the Hermitian `K`.
pub fn vectorized_oracle(h: &HermitianOperator, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    joint_vectorized_oracle(std::slice::from_ref(h), rho, t)
}

/// `unvec(exp(t Σ_k −K_k²/2) vec(ρ))`: the exact flow of the Lindbladian with
/// jump operators `H_1, …, H_n`.
pub fn joint_vectorized_oracle(hs: &[HermitianOperator], rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let prop = joint_propagator(hs, rho.dim(), t)?;
    let out = unvec(&prop.matrix().matvec(&vec(rho.matrix()))?, rho.dim())?;
    Ok(DensityMatrix::from_channel_output(out))
}

/// `exp(t Σ_k −K_k²/2)` as a superoperator, via one Hermitian
/// eigendecomposition of the summed generator.
pub fn joint_propagator(hs: &[HermitianOperator], d: usize, t: f64) -> Result<SuperoperatorMatrix> {
    require_time(t)?;
    let mut generator = ComplexMatrix::zeros(d * d, d * d);
    for h in hs {
        if h.dim() != d {
            return Err(TwirlError::Shape(format!("jump operator dimension {} vs state dimension {d}", h.dim())));
        }
        let k = commutator_generator(h.matrix())?;
        generator = generator.try_sub(&k.matmul(&k)?.scale_real(0.5))?;
    }
    let eig = eig_hermitian(&generator.hermitian_part()?)?;
    SuperoperatorMatrix::new(d, eig.map_spectrum(|g| C64::new((g * t).exp(), 0.0)))
}

/// Flow of the Lindbladian whose Lévy exponent is `ψ`: multiplier `exp(tψ(λ_j − λ_k))`.
pub fn levy_evolution(
    h: &HermitianOperator,
    triplet: &LevyTriplet,
    rho: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    require_time(t)?;
    triplet.validate()?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    exact_channel(h, &DistributionSpec::Levy(triplet.scaled(t)))?.apply(rho)
}

/// Flow of `L(ρ) = E_{s∼base}[e^{-iHs} ρ e^{iHs}] − ρ` for time `t` (rate folded in):
/// multiplier `exp(t(char_minus_base(λ_j − λ_k) − 1))`.
pub fn compound_poisson_evolution(
    h: &HermitianOperator,
    base: &DistributionSpec,
    rho: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    require_time(t)?;
    validate_jump_law(base)?;
    if t == 0.0 {
        return Ok(rho.clone());
    }
    exact_channel(h, &DistributionSpec::compound_poisson(t, base.clone()))?.apply(rho)
}

/// The generator of the Lévy twirl semigroup assembled from operators:
///
/// `L(ρ) = −i(γ − c)[H, ρ] + σ²(HρH − ½{H², ρ}) + Σ_j w_j (e^{−iHs_j} ρ e^{iHs_j} − ρ)`
///
/// where `c` is the compensator drift. It agrees with the Schur map of `ψ`.
pub fn levy_generator(h: &HermitianOperator, triplet: &LevyTriplet) -> Result<SuperoperatorMatrix> {
    triplet.validate()?;
    let hm = h.matrix();
    let h2 = hm.matmul(hm)?;
    let drift = triplet.gamma - triplet.compensator_drift();
    let kicks: Vec<(f64, ComplexMatrix)> = triplet.jumps.iter().map(|j| (j.weight, h.evolution(j.at))).collect();
    SuperoperatorMatrix::from_map(h.dim(), |x| {
        let comm = hm.commutator(x)?;
        let mut out = comm.scale(C64::new(0.0, -drift));
        let hxh = hm.matmul(x)?.matmul(hm)?;
        let anti = h2.matmul(x)?.try_add(&x.matmul(&h2)?)?;
        out = out.try_add(&hxh.try_sub(&anti.scale_real(0.5))?.scale_real(triplet.sigma2))?;
        for (w, u) in &kicks {
            let kicked = u.matmul(x)?.matmul(&u.adjoint())?;
            out = out.try_add(&kicked.try_sub(x)?.scale_real(*w))?;
        }
        Ok(out)
    })
}

/// Max entrywise deviation between a Gauss–Hermite evaluation of
/// `(2πt)^{-1/2} ∫ e^{-s²/2t} e^{-iHs} ds` and the spectral `exp(−H²t/2)`.
pub fn hs_quadrature_check(h: &HermitianOperator, t: f64, nodes: usize) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(TwirlError::Domain(format!("quadrature check needs t > 0, got {t}")));
    }
    if nodes < 16 {
        return Err(TwirlError::Precondition(format!("quadrature check needs at least 16 nodes, got {nodes}")));
    }
    let rule = gauss_hermite(nodes);
    let d = h.dim();
    let scale = (2.0 * t).sqrt();
    let norm = std::f64::consts::PI.sqrt();
    let mut quad = ComplexMatrix::zeros(d, d);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        quad = quad.try_add(&h.evolution(scale * x).scale_real(w / norm))?;
    }
    let target = h.spectrum().map_spectrum(|l| C64::new((-0.5 * l * l * t).exp(), 0.0));
    quad.max_abs_diff(&target)
}

fn require_commuting(hs: &[HermitianOperator]) -> Result<()> {
    if hs.is_empty() {
        return Err(TwirlError::Precondition("no jump operators given".into()));
    }
    for a in 0..hs.len() {
        for b in a + 1..hs.len() {
            let comm = hs[a].matrix().commutator(hs[b].matrix())?.max_abs();
            if comm > COMMUTATION_TOL {
                return Err(TwirlError::Precondition(format!(
                    "jump operators {a} and {b} do not commute (max |[H_{a}, H_{b}]| = {comm:.3e})"
                )));
            }
        }
    }
    Ok(())
}

/// Sequential Gaussian twirls applied to a state, for pairwise commuting
/// jump operators.
pub fn sequential_commuting_evolution(hs: &[HermitianOperator], rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    require_time(t)?;
    require_commuting(hs)?;
    let mut state = rho.clone();
    for h in hs {
        state = gaussian_evolution(h, &state, t)?;
    }
    Ok(state)
}

/// Choi matrix of the composition of Gaussian twirls by pairwise commuting
/// `H_1, …, H_n`, which equals the flow of the summed Lindbladian.
pub fn sequential_choi_commuting(hs: &[HermitianOperator], t: f64) -> Result<ChoiMatrix> {
    require_time(t)?;
    require_commuting(hs)?;
    let d = hs[0].dim();
    let mut total = SuperoperatorMatrix::identity(d);
    for h in hs {
        if h.dim() != d {
            return Err(TwirlError::Shape(format!("jump operator dimensions {} and {d} differ", h.dim())));
        }
        total = gaussian_multiplier(h, t).superoperator()?.compose(&total)?;
    }
    Ok(choi_of_superoperator(&total))
}

/// Choi matrix of `exp(t Σ_k −K_k²/2)`.
pub fn joint_generator_choi(hs: &[HermitianOperator], t: f64) -> Result<ChoiMatrix> {
    let d = hs.first().map(HermitianOperator::dim).ok_or_else(|| TwirlError::Precondition("no jump operators given".into()))?;
    Ok(choi_of_superoperator(&joint_propagator(hs, d, t)?))
}

/// Multiplier entries `exp(tψ(ω))` and the identity diagonal, handy for the
/// semigroup checks.
pub fn gaussian_multiplier(h: &HermitianOperator, t: f64) -> SchurMultiplier {
    SchurMultiplier::from_gap_function(h, |w| if w == 0.0 { ONE } else { C64::new((-0.5 * t * w * w).exp(), 0.0) })
}

/// Multiplier of the compound-Poisson twirl at time `t`.
pub fn compound_poisson_multiplier(h: &HermitianOperator, base: &DistributionSpec, t: f64) -> Result<SchurMultiplier> {
    validate_jump_law(base)?;
    Ok(SchurMultiplier::from_gap_function(h, |w| ((base.char_minus(w) - ONE) * t).exp()))
}

/// Multiplier of the Lévy twirl at time `t`.
pub fn levy_multiplier(h: &HermitianOperator, triplet: &LevyTriplet, t: f64) -> Result<SchurMultiplier> {
    triplet.validate()?;
    Ok(SchurMultiplier::from_gap_function(h, |w| (levy_psi(triplet, w) * t).exp()))
}
