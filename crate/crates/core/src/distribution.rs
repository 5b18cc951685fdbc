//! Classical laws that drive a Hamiltonian twirl, and their characteristic
//! functions.
//!
//! Everything here uses the conjugate convention
//! `char_minus(ω) = E[e^{-iωs}]`, which is the value a twirl multiplies the
//! `(j, k)` eigenbasis entry by at `ω = λ_j − λ_k`. The Lévy exponent is
//! written in the same convention so that `exp(ψ) = char_minus` for every
//! triplet.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwirlError};
use crate::linalg::{C64, ONE};
use crate::quadrature::{gauss_legendre, integrate};

/// Tolerance on the total mass of a finite mixture.
pub const MIXTURE_MASS_TOL: f64 = 1e-12;

/// One atom `(shift, probability)` of a finite mixture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: f64,
    pub prob: f64,
}

/// One atom `(shift, weight)` of a finite Lévy measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub weight: f64,
}

/// Lévy–Khintchine data `(σ², γ, ν)` with a finitely supported `ν`.
///
/// With `compensated` set, small jumps (`|s| ≤ 1`) carry the usual
/// `iωs·1[|s| ≤ 1]` compensator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub jumps: Vec<Jump>,
    #[serde(default)]
    pub compensated: bool,
}

impl LevyTriplet {
    pub fn gaussian(sigma2: f64) -> Self {
        Self { sigma2, gamma: 0.0, jumps: Vec::new(), compensated: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 >= 0.0) {
            return Err(TwirlError::Distribution(format!("sigma2 must be finite and nonnegative, got {}", self.sigma2)));
        }
        if !self.gamma.is_finite() {
            return Err(TwirlError::Distribution("gamma must be finite".into()));
        }
        for j in &self.jumps {
            if !j.at.is_finite() || j.at == 0.0 {
                return Err(TwirlError::Distribution(format!("Lévy measure atom at {} (must be finite and nonzero)", j.at)));
            }
            if !(j.weight.is_finite() && j.weight > 0.0) {
                return Err(TwirlError::Distribution(format!("Lévy measure weight {} must be positive", j.weight)));
            }
        }
        Ok(())
    }

    /// The triplet of the law at time `t`: `(tσ², tγ, tν)`, whose exponent is `tψ`.
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            sigma2: self.sigma2 * t,
            gamma: self.gamma * t,
            jumps: self.jumps.iter().map(|j| Jump { at: j.at, weight: j.weight * t }).collect(),
            compensated: self.compensated,
        }
    }

    /// Total jump intensity `ν(ℝ)`.
    pub fn jump_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.weight).sum()
    }

    /// Drift removed by the compensator, `Σ w_j s_j 1[|s_j| ≤ 1]`.
    pub fn compensator_drift(&self) -> f64 {
        if !self.compensated {
            return 0.0;
        }
        self.jumps.iter().filter(|j| j.at.abs() <= 1.0).map(|j| j.weight * j.at).sum()
    }
}

/// `ψ(ω) = −σ²ω²/2 − iγω + Σ_j w_j (e^{−iωs_j} − 1 + iωs_j·1[|s_j| ≤ 1]·compensated)`.
pub fn levy_psi(triplet: &LevyTriplet, omega: f64) -> C64 {
    let mut psi = C64::new(-0.5 * triplet.sigma2 * omega * omega, -triplet.gamma * omega);
    for j in &triplet.jumps {
        let mut term = C64::from_polar(1.0, -omega * j.at) - ONE;
        if triplet.compensated && j.at.abs() <= 1.0 {
            term += C64::new(0.0, omega * j.at);
        }
        psi += term * j.weight;
    }
    psi
}

/// A law on the real line used as the time distribution of a twirl.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Gaussian { variance: f64 },
    TruncatedGaussian { variance: f64, cutoff: f64 },
    Dirac { at: f64 },
    FiniteMixture { atoms: Vec<Atom> },
    CompoundPoisson { rate: f64, base: Box<DistributionSpec> },
    Levy(LevyTriplet),
}

impl DistributionSpec {
    pub fn compound_poisson(rate: f64, base: DistributionSpec) -> Self {
        Self::CompoundPoisson { rate, base: Box::new(base) }
    }

    pub fn mixture(atoms: &[(f64, f64)]) -> Self {
        Self::FiniteMixture { atoms: atoms.iter().map(|&(at, prob)| Atom { at, prob }).collect() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::TruncatedGaussian { .. } => "truncated_gaussian",
            Self::Dirac { .. } => "dirac",
            Self::FiniteMixture { .. } => "finite_mixture",
            Self::CompoundPoisson { .. } => "compound_poisson",
            Self::Levy(_) => "levy",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { variance } => {
                if !(variance.is_finite() && *variance >= 0.0) {
                    return Err(TwirlError::Distribution(format!("Gaussian variance {variance} must be nonnegative")));
                }
            }
            Self::TruncatedGaussian { variance, cutoff } => {
                if !(variance.is_finite() && *variance > 0.0) {
                    return Err(TwirlError::Distribution(format!("truncated Gaussian variance {variance} must be positive")));
                }
                if !(cutoff.is_finite() && *cutoff > 0.0) {
                    return Err(TwirlError::Distribution(format!("truncation cutoff {cutoff} must be positive")));
                }
            }
            Self::Dirac { at } => {
                if !at.is_finite() {
                    return Err(TwirlError::Distribution("Dirac location must be finite".into()));
                }
            }
            Self::FiniteMixture { atoms } => {
                if atoms.is_empty() {
                    return Err(TwirlError::Distribution("finite mixture has no atoms".into()));
                }
                for a in atoms {
                    if !a.at.is_finite() || !(a.prob.is_finite() && a.prob >= 0.0) {
                        return Err(TwirlError::Distribution(format!("bad mixture atom ({}, {})", a.at, a.prob)));
                    }
                }
                let mass: f64 = atoms.iter().map(|a| a.prob).sum();
                if (mass - 1.0).abs() > MIXTURE_MASS_TOL {
                    return Err(TwirlError::Distribution(format!("mixture probabilities sum to {mass}, expected 1")));
                }
            }
            Self::CompoundPoisson { rate, base } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(TwirlError::Distribution(format!("Poisson rate {rate} must be nonnegative")));
                }
                validate_jump_law(base)?;
            }
            Self::Levy(triplet) => triplet.validate()?,
        }
        Ok(())
    }

    /// `E[e^{-iωs}]` in closed form (quadrature for the truncated Gaussian).
    pub fn char_minus(&self, omega: f64) -> C64 {
        match self {
            Self::Gaussian { variance } => C64::new((-0.5 * variance * omega * omega).exp(), 0.0),
            Self::TruncatedGaussian { variance, cutoff } => {
                C64::new(truncated_gaussian_char(*variance, *cutoff, omega), 0.0)
            }
            Self::Dirac { at } => C64::from_polar(1.0, -omega * at),
            Self::FiniteMixture { atoms } => atoms.iter().map(|a| C64::from_polar(a.prob, -omega * a.at)).sum(),
            Self::CompoundPoisson { rate, base } => ((base.char_minus(omega) - ONE) * *rate).exp(),
            Self::Levy(triplet) => levy_psi(triplet, omega).exp(),
        }
    }

    /// The member at time `t` of the convolution semigroup generated by this
    /// law, i.e. the law with characteristic function `char_minus^t`.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(TwirlError::Domain(format!("time must be nonnegative, got {t}")));
        }
        Ok(match self {
            Self::Gaussian { variance } => Self::Gaussian { variance: variance * t },
            Self::Dirac { at } => Self::Dirac { at: at * t },
            Self::CompoundPoisson { rate, base } => Self::CompoundPoisson { rate: rate * t, base: base.clone() },
            Self::Levy(triplet) => Self::Levy(triplet.scaled(t)),
            other => {
                return Err(TwirlError::Distribution(format!(
                    "{} is not infinitely divisible and has no time-t member",
                    other.name()
                )))
            }
        })
    }
}

/// Jump laws accepted as a compound-Poisson base: Dirac, finite mixture or
/// Gaussian, with no mass at 0.
pub fn validate_jump_law(base: &DistributionSpec) -> Result<()> {
    base.validate()?;
    match base {
        DistributionSpec::Dirac { at } if *at == 0.0 => {
            Err(TwirlError::Distribution("compound Poisson base puts mass at 0".into()))
        }
        DistributionSpec::FiniteMixture { atoms } if atoms.iter().any(|a| a.at == 0.0 && a.prob > 0.0) => {
            Err(TwirlError::Distribution("compound Poisson base puts mass at 0".into()))
        }
        DistributionSpec::Gaussian { variance } if *variance == 0.0 => {
            Err(TwirlError::Distribution("compound Poisson base puts mass at 0 (zero variance)".into()))
        }
        DistributionSpec::Dirac { .. } | DistributionSpec::FiniteMixture { .. } | DistributionSpec::Gaussian { .. } => {
            Ok(())
        }
        other => Err(TwirlError::Distribution(format!(
            "compound Poisson base must be dirac, finite_mixture or gaussian, got {}",
            other.name()
        ))),
    }
}

/// `∫_{-S}^{S} e^{-s²/2t} cos(ωs) ds / ∫_{-S}^{S} e^{-s²/2t} ds` by
/// composite 64-node Gauss–Legendre on `[0, S]`.
pub fn truncated_gaussian_char(variance: f64, cutoff: f64, omega: f64) -> f64 {
    let rule = gauss_legendre(64);
    let sd = variance.sqrt();
    let panels = ((omega.abs() * cutoff / 40.0).max(cutoff / (4.0 * sd))).ceil().max(1.0) as usize;
    let weight = |s: f64| (-s * s / (2.0 * variance)).exp();
    let num = integrate(&rule, 0.0, cutoff, panels, |s| weight(s) * (omega * s).cos());
    let den = integrate(&rule, 0.0, cutoff, panels, weight);
    num / den
}
