//! Classical emulation of continuous-variable phase estimation.
//!
//! For an eigenstate with energy `λ₀`, the conjugate-register readout after
//! evolution time `t` is distributed as `N(−λ₀, 1/(4t))`. The estimator is
//! the negated sample mean.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, TwirlError};
use crate::hamiltonian::HermitianOperator;
use crate::sampler::shot_stream;

/// Estimates separated by fewer than this many combined standard errors
/// are reported as unresolved.
pub const RESOLUTION_SIGMAS: f64 = 5.0;

/// Stream index offset per eigen index, so every index gets disjoint streams.
const STREAMS_PER_INDEX: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq)]
pub struct QpeRun {
    pub t: f64,
    pub eigen_index: usize,
    pub true_lambda: f64,
    pub samples: Vec<f64>,
    /// Mean of the raw readouts, centred at `−λ₀`.
    pub raw_mean: f64,
    pub estimate: f64,
    pub stderr: f64,
}

impl QpeRun {
    fn from_samples(t: f64, eigen_index: usize, true_lambda: f64, samples: Vec<f64>) -> Self {
        let m = samples.len() as f64;
        let raw_mean = samples.iter().sum::<f64>() / m;
        let var = samples.iter().map(|k| (k - raw_mean).powi(2)).sum::<f64>() / (m - 1.0);
        Self { t, eigen_index, true_lambda, samples, raw_mean, estimate: -raw_mean, stderr: (var / m).sqrt() }
    }

    /// `(estimate − 5σ, estimate + 5σ)`.
    pub fn interval(&self) -> (f64, f64) {
        (self.estimate - RESOLUTION_SIGMAS * self.stderr, self.estimate + RESOLUTION_SIGMAS * self.stderr)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(TwirlError::Domain(format!("phase estimation needs t > 0, got {t}")))
    }
}

fn check_shots(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(TwirlError::Precondition(format!("the standard error needs M >= 2 samples, got {m}")))
    }
}

/// One readout `k ∼ N(−λ₀, 1/(4t))`.
pub fn sample_k<R: Rng + ?Sized>(lambda0: f64, t: f64, rng: &mut R) -> Result<f64> {
    check_time(t)?;
    let z: f64 = rng.sample(StandardNormal);
    Ok(-lambda0 + z / (2.0 * t.sqrt()))
}

fn draw_samples(lambda0: f64, t: f64, m: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let mut rng = shot_stream(seed, stream);
    (0..m).map(|_| sample_k(lambda0, t, &mut rng)).collect()
}

/// `M` readouts for the eigenstate `eigen_index` of `H` (ascending order).
pub fn estimate_lambda(h: &HermitianOperator, eigen_index: usize, t: f64, m: usize, seed: u64) -> Result<QpeRun> {
    check_time(t)?;
    check_shots(m)?;
    let lambdas = h.eigenvalues();
    let lambda = *lambdas.get(eigen_index).ok_or_else(|| {
        TwirlError::Precondition(format!("eigen index {eigen_index} out of range for dimension {}", lambdas.len()))
    })?;
    let samples = draw_samples(lambda, t, m, seed, eigen_index as u64 * STREAMS_PER_INDEX)?;
    Ok(QpeRun::from_samples(t, eigen_index, lambda, samples))
}

/// Per-index runs, plus for each adjacent pair whether the two estimates are
/// separated by more than [`RESOLUTION_SIGMAS`] combined standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub runs: Vec<QpeRun>,
    pub resolved: Vec<bool>,
}

pub fn resolve_spectrum(h: &HermitianOperator, t: f64, m: usize, seed: u64) -> Result<SpectrumReport> {
    let runs = (0..h.dim()).map(|i| estimate_lambda(h, i, t, m, seed)).collect::<Result<Vec<_>>>()?;
    let resolved = runs
        .windows(2)
        .map(|w| {
            let sigma = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            (w[1].estimate - w[0].estimate).abs() > RESOLUTION_SIGMAS * sigma
        })
        .collect();
    Ok(SpectrumReport { runs, resolved })
}

/// Readouts for a general input state with eigenbasis populations
/// `weights`: a Gaussian mixture over the spectrum. This goes beyond the
/// eigenstate analysis and is only available behind `derived_mixture`.
pub fn sample_superposition(
    h: &HermitianOperator,
    weights: &[f64],
    t: f64,
    m: usize,
    seed: u64,
    derived_mixture: bool,
) -> Result<Vec<f64>> {
    if !derived_mixture {
        return Err(TwirlError::Precondition(
            "superposition readout is a derived mixture model; enable it explicitly".into(),
        ));
    }
    check_time(t)?;
    let lambdas = h.eigenvalues();
    if weights.len() != lambdas.len() {
        return Err(TwirlError::Shape(format!("{} weights for {} eigenvalues", weights.len(), lambdas.len())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(TwirlError::InvalidState("populations must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(TwirlError::InvalidState(format!("populations sum to {total}, expected 1")));
    }
    let mut rng = shot_stream(seed, 0);
    (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            let mut cdf = 0.0;
            let mut idx = lambdas.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                cdf += w;
                if u < cdf {
                    idx = i;
                    break;
                }
            }
            sample_k(lambdas[idx], t, &mut rng)
        })
        .collect()
}

/// Eigenbasis populations `|⟨ψ_j|ψ⟩|²` of a pure state.
pub fn eigen_populations(h: &HermitianOperator, psi: &[crate::linalg::C64]) -> Result<Vec<f64>> {
    let v = h.eigenvectors();
    if psi.len() != h.dim() {
        return Err(TwirlError::Shape(format!("state of length {} for dimension {}", psi.len(), h.dim())));
    }
    let amps = v.adjoint().matvec(psi)?;
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}
