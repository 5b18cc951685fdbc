//! Randomized twirl samplers.
//!
//! The Gaussian sampler draws one time `s` from `N(0, t)` restricted to
//! `[−S, S]` with `S = √(2t ln(4/ε))`, applies `e^{−iHs}` and discards `s`.
//! The compound-Poisson sampler applies a Poisson number of kicks drawn from
//! a base law. Each shot reads its randomness from a ChaCha8 stream keyed by
//! `(seed, shot_index)`, so any shot can be replayed in isolation and shots
//! may run in any order or on any number of threads.
//!
//! Monte-Carlo averaging over many shots is verification machinery: the
//! algorithm itself is a single shot. Since every shot unitary is a function
//! of `H`, the average channel is a Schur multiplier in the eigenbasis of `H`
//! with entries `(1/M) Σ_i e^{−i(λ_j − λ_k) s_i}`. The sum is accumulated per
//! chunk of [`REDUCTION_CHUNK`] shots in shot order, and chunk sums are added
//! in chunk order, so the result does not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channels::{ChoiMatrix, DensityMatrix, SchurMultiplier};
use crate::distribution::{validate_jump_law, Atom, DistributionSpec, LevyTriplet};
use crate::error::{Result, TwirlError};
use crate::hamiltonian::HermitianOperator;
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::quadrature::{gauss_legendre, integrate};

/// Shots per reduction chunk.
pub const REDUCTION_CHUNK: usize = 1024;

/// Largest Poisson mean handled by a single inversion search.
pub const POISSON_INVERSION_MAX: f64 = 30.0;

/// `S = √(2t ln(4/ε))`.
pub fn cutoff(t: f64, epsilon: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(TwirlError::Domain(format!("cutoff needs t > 0, got {t}")));
    }
    check_epsilon(epsilon)?;
    Ok((2.0 * t * (4.0 / epsilon).ln()).sqrt())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(TwirlError::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Parameters of a batch of truncated-Gaussian shots.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotPlan {
    pub t: f64,
    pub epsilon: f64,
    pub cutoff: f64,
    pub shots: usize,
    pub seed: u64,
    /// Test hook: every shot uses this time instead of sampling.
    pub forced_shift: Option<f64>,
}

impl ShotPlan {
    /// A plan with the cutoff derived from `(t, ε)`. At `t = 0` the cutoff is
    /// 0 and every shot is the identity.
    pub fn new(t: f64, epsilon: f64, shots: usize, seed: u64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(TwirlError::Domain(format!("evolution time must be nonnegative, got {t}")));
        }
        if shots == 0 {
            return Err(TwirlError::Precondition("a shot plan needs at least one shot".into()));
        }
        let cutoff = if t == 0.0 { 0.0 } else { cutoff(t, epsilon)? };
        Ok(Self { t, epsilon, cutoff, shots, seed, forced_shift: None })
    }

    pub fn with_forced_shift(mut self, s: f64) -> Self {
        self.forced_shift = Some(s);
        self
    }

    /// One time drawn for this plan from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Some(s) = self.forced_shift {
            return s;
        }
        if self.t == 0.0 {
            return 0.0;
        }
        sample_truncated_normal(self.t, self.cutoff, rng)
    }
}

/// The random stream of shot `shot_index` under `seed`.
pub fn shot_stream(seed: u64, shot_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot_index);
    rng
}

/// `N(0, t)` conditioned on `|s| ≤ S`, by rejection.
pub fn sample_truncated_normal<R: Rng + ?Sized>(t: f64, s_max: f64, rng: &mut R) -> f64 {
    let sd = t.sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let s = sd * z;
        if s.abs() <= s_max {
            return s;
        }
    }
}

/// One shot: `e^{−iHs} ρ e^{iHs}` with `s` drawn from the stream of
/// `(plan.seed, shot_index)`, and the cost `|s|`.
pub fn run_shot(
    h: &HermitianOperator,
    rho: &DensityMatrix,
    plan: &ShotPlan,
    shot_index: u64,
) -> Result<(DensityMatrix, f64)> {
    let mut rng = shot_stream(plan.seed, shot_index);
    let s = plan.draw(&mut rng);
    let out = h.conjugate(rho.matrix(), s)?;
    Ok((DensityMatrix::from_channel_output(out), s.abs()))
}

/// Hamiltonian-simulation time spent by a batch of shots.
#[derive(Clone, Debug, PartialEq)]
pub struct CostLedger {
    pub per_shot_times: Vec<f64>,
    pub total_time: f64,
    /// A priori bound per shot (the cutoff) for the truncated sampler; the
    /// largest observed cost for unbounded laws.
    pub worst_case: f64,
    pub shots: usize,
}

impl CostLedger {
    fn from_costs(per_shot_times: Vec<f64>, worst_case: Option<f64>) -> Self {
        let total_time = per_shot_times.iter().fold(0.0, |acc, c| acc + c);
        let worst_case = worst_case.unwrap_or_else(|| per_shot_times.iter().copied().fold(0.0, f64::max));
        let shots = per_shot_times.len();
        Self { per_shot_times, total_time, worst_case, shots }
    }

    pub fn mean_time(&self) -> f64 {
        self.total_time / self.shots as f64
    }

    /// Standard error of [`Self::mean_time`].
    pub fn mean_time_stderr(&self) -> f64 {
        let n = self.shots as f64;
        if self.shots < 2 {
            return f64::NAN;
        }
        let mean = self.mean_time();
        let var = self.per_shot_times.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Monte-Carlo average of shot channels, held as a Schur multiplier in the
/// eigenbasis of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalChannel {
    multiplier: SchurMultiplier,
    shots: usize,
}

impl EmpiricalChannel {
    pub fn dim(&self) -> usize {
        self.multiplier.dim()
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn multiplier(&self) -> &SchurMultiplier {
        &self.multiplier
    }

    /// Mean Choi matrix `(1/M) Σ_i J(U_{s_i} · U_{s_i}†)`.
    pub fn choi(&self) -> Result<ChoiMatrix> {
        self.multiplier.choi()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_channel_output(self.multiplier.apply_matrix(rho.matrix())?))
    }
}

/// Runs `shots` draws of `draw` (one stream per shot) and averages the
/// resulting unitary channels. `draw` returns `(s, cost)`.
pub fn estimate_with<F>(
    h: &HermitianOperator,
    shots: usize,
    seed: u64,
    worst_case: Option<f64>,
    draw: F,
) -> Result<(EmpiricalChannel, CostLedger)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, f64)> + Sync,
{
    if shots == 0 {
        return Err(TwirlError::Precondition("at least one shot is required".into()));
    }
    let d = h.dim();
    let lambdas = h.eigenvalues();
    let chunks = shots.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<Result<(Vec<C64>, Vec<f64>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(shots);
            let mut acc = vec![ZERO; d * d];
            let mut costs = Vec::with_capacity(hi - lo);
            let mut phases = vec![ZERO; d];
            for i in lo..hi {
                let mut rng = shot_stream(seed, i as u64);
                let (s, cost) = draw(&mut rng)?;
                for (p, &l) in phases.iter_mut().zip(lambdas) {
                    *p = C64::from_polar(1.0, -l * s);
                }
                for j in 0..d {
                    for k in 0..d {
                        acc[j * d + k] += phases[j] * phases[k].conj();
                    }
                }
                costs.push(cost);
            }
            Ok((acc, costs))
        })
        .collect();
    let mut total = vec![ZERO; d * d];
    let mut costs = Vec::with_capacity(shots);
    for part in partials {
        let (acc, c) = part?;
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a;
        }
        costs.extend(c);
    }
    let inv = 1.0 / shots as f64;
    let mean = ComplexMatrix::from_row_major(d, d, total.into_iter().map(|z| z * inv).collect())?;
    let multiplier = SchurMultiplier::new(h.eigenvectors().clone(), mean)?;
    Ok((EmpiricalChannel { multiplier, shots }, CostLedger::from_costs(costs, worst_case)))
}

/// Monte-Carlo estimate of the truncated Gaussian twirl for `plan`.
pub fn estimate_channel(h: &HermitianOperator, plan: &ShotPlan) -> Result<(EmpiricalChannel, CostLedger)> {
    let worst = plan.forced_shift.map_or(plan.cutoff, f64::abs);
    estimate_with(h, plan.shots, plan.seed, Some(worst), |rng| {
        let s = plan.draw(rng);
        Ok((s, s.abs()))
    })
}

/// Monte-Carlo estimate of the compound-Poisson twirl with jump law `base`
/// at time `t` (unit rate). Cost per shot is the summed length of its kicks.
pub fn estimate_compound_channel(
    h: &HermitianOperator,
    base: &DistributionSpec,
    t: f64,
    shots: usize,
    seed: u64,
) -> Result<(EmpiricalChannel, CostLedger)> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(TwirlError::Domain(format!("evolution time must be nonnegative, got {t}")));
    }
    validate_jump_law(base)?;
    estimate_with(h, shots, seed, None, |rng| sample_compound_poisson_with_cost(t, base, rng))
}

/// Monte-Carlo estimate of the twirl by an arbitrary law.
pub fn estimate_law_channel(
    h: &HermitianOperator,
    dist: &DistributionSpec,
    shots: usize,
    seed: u64,
) -> Result<(EmpiricalChannel, CostLedger)> {
    dist.validate()?;
    let worst = match dist {
        DistributionSpec::TruncatedGaussian { cutoff, .. } => Some(*cutoff),
        _ => None,
    };
    estimate_with(h, shots, seed, worst, |rng| sample_law(dist, rng))
}

/// `√(2/π)·(√t/S)·e^{−S²/2t}`, an upper bound on the Gaussian tail mass
/// outside `[−S, S]`.
pub fn tv_bound(t: f64, s_max: f64) -> Result<f64> {
    check_positive(t, s_max)?;
    let r = t.sqrt() / s_max;
    Ok(((2.0 / std::f64::consts::PI).sqrt() * r * (-s_max * s_max / (2.0 * t)).exp()).min(1.0))
}

/// `1 − Z_{t,S}`, the exact Gaussian tail mass outside `[−S, S]`, which is
/// the total-variation distance between `N(0, t)` and its truncation.
pub fn tv_exact(t: f64, s_max: f64) -> Result<f64> {
    check_positive(t, s_max)?;
    Ok(gaussian_two_sided_tail(s_max / t.sqrt()))
}

/// `P(|Z| > a)` for standard normal `Z`, integrating the density over
/// `[a, a + 40]`.
fn gaussian_two_sided_tail(a: f64) -> f64 {
    let rule = gauss_legendre(32);
    let norm = (2.0 / std::f64::consts::PI).sqrt();
    norm * integrate(&rule, a, a + 40.0, 40, |x| (-0.5 * x * x).exp())
}

fn check_positive(t: f64, s_max: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 && s_max.is_finite() && s_max > 0.0 {
        Ok(())
    } else {
        Err(TwirlError::Domain(format!("need t > 0 and S > 0, got t = {t}, S = {s_max}")))
    }
}

/// `Poisson(rate)` by inversion with sequential search. Means above
/// [`POISSON_INVERSION_MAX`] are split into independent pieces.
pub fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    let mut remaining = rate;
    let mut n = 0;
    while remaining > 0.0 {
        let piece = remaining.min(POISSON_INVERSION_MAX);
        remaining -= piece;
        n += poisson_inversion(piece, rng);
    }
    n
}

fn poisson_inversion<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut p = (-rate).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf {
        k += 1;
        p *= rate / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}

/// A compound-Poisson draw `Σ_{j ≤ N} X_j` with `N ∼ Poisson(rate_time)`.
pub fn sample_compound_poisson<R: Rng + ?Sized>(rate_time: f64, base: &DistributionSpec, rng: &mut R) -> Result<f64> {
    Ok(sample_compound_poisson_with_cost(rate_time, base, rng)?.0)
}

/// As [`sample_compound_poisson`], also returning the kick cost `Σ |X_j|`.
pub fn sample_compound_poisson_with_cost<R: Rng + ?Sized>(
    rate_time: f64,
    base: &DistributionSpec,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(rate_time.is_finite() && rate_time >= 0.0) {
        return Err(TwirlError::Domain(format!("Poisson mean must be nonnegative, got {rate_time}")));
    }
    let n = sample_poisson(rate_time, rng);
    let mut s = 0.0;
    let mut cost = 0.0;
    for _ in 0..n {
        let (x, _) = sample_jump(base, rng)?;
        s += x;
        cost += x.abs();
    }
    Ok((s, cost))
}

fn sample_jump<R: Rng + ?Sized>(base: &DistributionSpec, rng: &mut R) -> Result<(f64, f64)> {
    match base {
        DistributionSpec::Dirac { .. } | DistributionSpec::FiniteMixture { .. } | DistributionSpec::Gaussian { .. } => {
            sample_law(base, rng)
        }
        other => Err(TwirlError::Distribution(format!(
            "compound Poisson base must be dirac, finite_mixture or gaussian, got {}",
            other.name()
        ))),
    }
}

fn sample_atoms<R: Rng + ?Sized>(atoms: &[Atom], rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut cdf = 0.0;
    for a in atoms {
        cdf += a.prob;
        if u < cdf {
            return a.at;
        }
    }
    // rounding left u above the last partial sum
    atoms.iter().rev().find(|a| a.prob > 0.0).map_or(atoms[0].at, |a| a.at)
}

/// One draw `(s, cost)` from `dist`. Cost is `|s|` except for laws with
/// jumps, where each kick is paid for separately.
pub fn sample_law<R: Rng + ?Sized>(dist: &DistributionSpec, rng: &mut R) -> Result<(f64, f64)> {
    let s = match dist {
        DistributionSpec::Gaussian { variance } => {
            let z: f64 = rng.sample(StandardNormal);
            variance.sqrt() * z
        }
        DistributionSpec::TruncatedGaussian { variance, cutoff } => sample_truncated_normal(*variance, *cutoff, rng),
        DistributionSpec::Dirac { at } => *at,
        DistributionSpec::FiniteMixture { atoms } => sample_atoms(atoms, rng),
        DistributionSpec::CompoundPoisson { rate, base } => return sample_compound_poisson_with_cost(*rate, base, rng),
        DistributionSpec::Levy(triplet) => return sample_levy(triplet, rng),
    };
    Ok((s, s.abs()))
}

/// `γ − c + N(0, σ²) + Σ_{j ≤ N} X_j` with `N ∼ Poisson(ν(ℝ))` and `X`
/// distributed as `ν / ν(ℝ)`; `c` is the compensator drift.
fn sample_levy<R: Rng + ?Sized>(triplet: &LevyTriplet, rng: &mut R) -> Result<(f64, f64)> {
    let z: f64 = rng.sample(StandardNormal);
    let continuous = triplet.gamma - triplet.compensator_drift() + triplet.sigma2.sqrt() * z;
    let rate = triplet.jump_rate();
    let (jumps, kick_cost) = if rate > 0.0 {
        let atoms: Vec<Atom> = triplet.jumps.iter().map(|j| Atom { at: j.at, prob: j.weight / rate }).collect();
        let n = sample_poisson(rate, rng);
        let mut s = 0.0;
        let mut cost = 0.0;
        for _ in 0..n {
            let x = sample_atoms(&atoms, rng);
            s += x;
            cost += x.abs();
        }
        (s, cost)
    } else {
        (0.0, 0.0)
    };
    Ok((continuous + jumps, continuous.abs() + kick_cost))
}

/// One row of the fast-forwarding table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub t: f64,
    pub epsilon: f64,
    pub cutoff: f64,
    pub cutoff_over_sqrt_t: f64,
}

pub fn scaling_table(ts: &[f64], epsilon: f64) -> Result<Vec<ScalingRow>> {
    ts.iter()
        .map(|&t| {
            let s = cutoff(t, epsilon)?;
            Ok(ScalingRow { t, epsilon, cutoff: s, cutoff_over_sqrt_t: s / t.sqrt() })
        })
        .collect()
}

/// Mean `|s|` over `draws` truncated-normal draws, one stream per draw.
pub fn mean_abs_shift(t: f64, s_max: f64, draws: usize, seed: u64) -> Result<f64> {
    check_positive(t, s_max)?;
    if draws == 0 {
        return Err(TwirlError::Precondition("need at least one draw".into()));
    }
    let total = (0..draws).fold(0.0, |acc, i| {
        let mut rng = shot_stream(seed, i as u64);
        acc + sample_truncated_normal(t, s_max, &mut rng).abs()
    });
    Ok(total / draws as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_trace_distance, SuperoperatorMatrix};
    use crate::linalg::pauli;
    use crate::random::{random_density_matrix, random_hermitian};
    use crate::twirl::{exact_channel, gaussian_multiplier};
    use std::f64::consts::PI;

    // √(2 ln 400)
    const S_001: f64 = 3.461_636_765_204_570_8;

    fn z() -> HermitianOperator {
        HermitianOperator::new(pauli::z()).unwrap()
    }

    #[test]
    fn cutoff_cases() {
        // ln(4/ε) = 1 needs ε = 4/e, which is outside (0, 1)
        assert!(matches!(cutoff(1.0, 4.0 / std::f64::consts::E), Err(TwirlError::Domain(_))));
        let t = 1.0 / 400f64.ln();
        assert!((cutoff(t, 0.01).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((cutoff(1.0, 0.01).unwrap() - S_001).abs() < 1e-15);
        assert!((cutoff(100.0, 0.01).unwrap() / cutoff(1.0, 0.01).unwrap() - 10.0).abs() < 1e-14);
        assert!(cutoff(0.0, 0.1).is_err());
        assert!(cutoff(1.0, 1.0).is_err());
        assert!(cutoff(1.0, 0.0).is_err());
        assert!(cutoff(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn plan_validation() {
        let plan = ShotPlan::new(1.0, 0.01, 10, 3).unwrap();
        assert!((plan.cutoff - S_001).abs() < 1e-12);
        assert_eq!(ShotPlan::new(0.0, 0.01, 10, 3).unwrap().cutoff, 0.0);
        assert!(ShotPlan::new(1.0, 0.01, 0, 3).is_err());
        assert!(ShotPlan::new(-1.0, 0.01, 1, 3).is_err());
        assert!(ShotPlan::new(1.0, 1.5, 1, 3).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(shot_stream(9, 5), |r, _: u64| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(shot_stream(9, 5), |r, _: u64| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(shot_stream(9, 6), |r, _: u64| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    /// Exact truncated-normal CDF at sorted points, integrated piecewise.
    fn truncated_cdf_sorted(t: f64, s_max: f64, sorted: &[f64]) -> Vec<f64> {
        let rule = gauss_legendre(8);
        let dens = |s: f64| (-s * s / (2.0 * t)).exp();
        let mass = integrate(&gauss_legendre(64), -s_max, s_max, 8, dens);
        let mut acc = 0.0;
        let mut prev = -s_max;
        sorted
            .iter()
            .map(|&x| {
                acc += integrate(&rule, prev, x, 1, dens);
                prev = x;
                acc / mass
            })
            .collect()
    }

    #[test]
    fn truncated_normal_law() {
        let (t, s_max) = (1.0, S_001);
        let n = 1_000_000;
        let mut rng = shot_stream(2024, 0);
        let mut draws: Vec<f64> = (0..n).map(|_| sample_truncated_normal(t, s_max, &mut rng)).collect();
        assert!(draws.iter().all(|s| s.abs() <= s_max));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4e-3, "{mean}");
        // t(1 − 2aφ(a)/Z) at a = S/√t, evaluated independently
        let truncated_var = 0.993_091_324_398_283_4;
        assert!((var / truncated_var - 1.0).abs() < 0.02, "{var}");

        draws.sort_by(f64::total_cmp);
        let cdf = truncated_cdf_sorted(t, s_max, &draws);
        let nf = n as f64;
        let ks = cdf
            .iter()
            .enumerate()
            .map(|(i, &f)| (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs()))
            .fold(0.0, f64::max);
        assert!(ks <= 2.0 / nf.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn truncated_variance_oracle() {
        // t(1 − 2aφ(a)/Z) with Z = 1 − tail(a)
        let a: f64 = S_001;
        let phi = (-0.5 * a * a).exp() / (2.0 * PI).sqrt();
        let z = 1.0 - gaussian_two_sided_tail(a);
        assert!((1.0 - 2.0 * a * phi / z - 0.993_091_324_398_283_4).abs() < 1e-13);
    }

    #[test]
    fn run_shot_cases() {
        let plan = ShotPlan::new(1.0, 0.01, 1, 77).unwrap();
        let diag = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.25, 0.75])).unwrap();
        for i in 0..20 {
            let (out, cost) = run_shot(&z(), &diag, &plan, i).unwrap();
            assert!(out.matrix().max_abs_diff(diag.matrix()).unwrap() < 1e-15);
            assert!(cost <= plan.cutoff);
        }
        let plus = DensityMatrix::plus_all(1);
        let (out, cost) = run_shot(&z(), &plus, &plan.clone().with_forced_shift(0.0), 0).unwrap();
        assert_eq!(out, plus);
        assert_eq!(cost, 0.0);

        let (out, cost) = run_shot(&z(), &plus, &plan, 11).unwrap();
        let s = plan.draw(&mut shot_stream(77, 11));
        assert_eq!(cost, s.abs());
        let expected = C64::from_polar(0.5, -2.0 * s);
        assert!((out.matrix()[(0, 1)] - expected).norm() < 1e-15);
        assert_eq!(run_shot(&z(), &plus, &plan, 11).unwrap().0, out);
    }

    #[test]
    fn forced_zero_shift_gives_identity_choi() {
        let plan = ShotPlan::new(1.0, 0.01, 1, 0).unwrap().with_forced_shift(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = HermitianOperator::new(random_hermitian(3, 1.0, &mut rng)).unwrap();
        let (emp, ledger) = estimate_channel(&h, &plan).unwrap();
        let id = crate::channels::choi_of_superoperator(&SuperoperatorMatrix::identity(3));
        assert!(choi_trace_distance(&emp.choi().unwrap(), &id).unwrap() < 1e-13);
        assert_eq!(ledger.total_time, 0.0);
    }

    #[test]
    fn empirical_choi_matches_direct_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = HermitianOperator::new(random_hermitian(3, 1.5, &mut rng)).unwrap();
        let plan = ShotPlan::new(0.8, 0.05, 37, 12).unwrap();
        let (emp, ledger) = estimate_channel(&h, &plan).unwrap();
        let mut direct = ComplexMatrix::zeros(9, 9);
        for i in 0..plan.shots {
            let s = plan.draw(&mut shot_stream(plan.seed, i as u64));
            assert_eq!(ledger.per_shot_times[i], s.abs());
            let u = h.evolution(s);
            let sup = SuperoperatorMatrix::unitary_conjugation(&u).unwrap();
            let j = crate::channels::choi_of_superoperator(&sup);
            direct = direct.try_add(j.matrix()).unwrap();
        }
        let direct = direct.scale_real(1.0 / plan.shots as f64);
        let emp_choi = emp.choi().unwrap();
        assert!(emp_choi.matrix().max_abs_diff(&direct).unwrap() < 1e-13);
        assert!((emp_choi.matrix().trace() - C64::new(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn ledger_invariants() {
        let plan = ShotPlan::new(2.0, 0.01, 3000, 8).unwrap();
        let (_, ledger) = estimate_channel(&z(), &plan).unwrap();
        assert_eq!(ledger.shots, 3000);
        assert_eq!(ledger.worst_case, plan.cutoff);
        assert!(ledger.per_shot_times.iter().all(|&c| c <= ledger.worst_case + 1e-15));
        let sum = ledger.per_shot_times.iter().fold(0.0, |a, c| a + c);
        assert_eq!(sum, ledger.total_time);
    }

    #[test]
    fn estimate_is_thread_count_independent() {
        let plan = ShotPlan::new(1.0, 0.01, 5000, 99).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_channel(&z(), &plan).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn algorithm_one_converges_to_exact_channel() {
        let plan = ShotPlan::new(1.0, 0.01, 200_000, 20_250_101).unwrap();
        let (emp, ledger) = estimate_channel(&z(), &plan).unwrap();
        let exact = exact_channel(&z(), &DistributionSpec::Gaussian { variance: 1.0 }).unwrap();
        let dist = choi_trace_distance(&emp.choi().unwrap(), &exact.multiplier().choi().unwrap()).unwrap();
        assert!(dist <= 0.02, "{dist}");
        assert!((ledger.worst_case - S_001).abs() < 1e-12);
    }

    #[test]
    fn tv_cases() {
        let e = (-0.5f64).exp();
        assert!((tv_bound(1.0, 1.0).unwrap() - (2.0 / PI).sqrt() * e).abs() < 1e-15);
        assert!((tv_bound(1.0, 1.0).unwrap() - 0.483_941_449_038_286_73).abs() < 1e-15);
        assert!(tv_bound(1.0, 60.0).unwrap() < 1e-300);
        assert!(tv_bound(1.0, S_001).unwrap() <= 0.005);
        assert!((tv_exact(1.0, 1.0).unwrap() - 0.317_310_507_862_914_15).abs() < 1e-14);
        assert!((tv_exact(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(tv_bound(0.0, 1.0).is_err());
        assert!(tv_exact(1.0, -1.0).is_err());
        for i in 0..10 {
            for j in 0..10 {
                let t = 0.1 * 3f64.powi(i);
                let s = t.sqrt() * (0.2 + 0.6 * j as f64);
                assert!(tv_exact(t, s).unwrap() <= tv_bound(t, s).unwrap());
            }
        }
    }

    #[test]
    fn poisson_sampling() {
        let mut rng = shot_stream(31, 0);
        assert_eq!(sample_poisson(0.0, &mut rng), 0);
        for &rate in &[0.7, 12.0, 75.0] {
            let n = 200_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_poisson(rate, &mut rng) as f64).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((mean - rate).abs() < 5.0 * (rate / n as f64).sqrt(), "{rate}: {mean}");
            assert!((var / rate - 1.0).abs() < 0.03, "{rate}: {var}");
        }
    }

    #[test]
    fn compound_poisson_sampling() {
        let mut rng = shot_stream(32, 0);
        let dirac = DistributionSpec::Dirac { at: 1.0 };
        for _ in 0..100 {
            assert_eq!(sample_compound_poisson(0.0, &dirac, &mut rng).unwrap(), 0.0);
        }
        let n = 1_000_000;
        let rate = 2.5;
        let mean = (0..n).map(|_| sample_compound_poisson(rate, &dirac, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean / rate - 1.0).abs() < 0.01, "{mean}");

        let sym = DistributionSpec::mixture(&[(1.0, 0.5), (-1.0, 0.5)]);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_compound_poisson(rate, &sym, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 * (rate / n as f64).sqrt());
        assert!((var / rate - 1.0).abs() < 0.03);

        let bad = DistributionSpec::TruncatedGaussian { variance: 1.0, cutoff: 1.0 };
        assert!(matches!(sample_compound_poisson(1.0, &bad, &mut rng), Err(TwirlError::Distribution(_))));
    }

    #[test]
    fn compound_channel_cases() {
        let (emp, ledger) = estimate_compound_channel(&z(), &DistributionSpec::Dirac { at: PI }, 1.0, 100_000, 4).unwrap();
        let id = crate::channels::choi_of_superoperator(&SuperoperatorMatrix::identity(2));
        assert!(choi_trace_distance(&emp.choi().unwrap(), &id).unwrap() <= 0.02);
        assert!((ledger.mean_time() - PI).abs() <= 3.0 * ledger.mean_time_stderr());

        let (emp, ledger) =
            estimate_compound_channel(&z(), &DistributionSpec::Dirac { at: 0.4 }, 0.0, 1000, 4).unwrap();
        assert!(choi_trace_distance(&emp.choi().unwrap(), &id).unwrap() == 0.0);
        assert_eq!(ledger.total_time, 0.0);

        let s0 = 0.3;
        let t = 2.0;
        let (_, ledger) =
            estimate_compound_channel(&z(), &DistributionSpec::Dirac { at: s0 }, t, 100_000, 5).unwrap();
        assert!((ledger.mean_time() - t * s0).abs() <= 3.0 * ledger.mean_time_stderr());
    }

    #[test]
    fn compound_channel_matches_closed_form() {
        let base = DistributionSpec::mixture(&[(0.8, 0.3), (-1.7, 0.7)]);
        let t = 1.3;
        let (emp, _) = estimate_compound_channel(&z(), &base, t, 100_000, 6).unwrap();
        let exact = crate::twirl::compound_poisson_multiplier(&z(), &base, t).unwrap();
        let dist = choi_trace_distance(&emp.choi().unwrap(), &exact.choi().unwrap()).unwrap();
        assert!(dist <= 0.02, "{dist}");
    }

    #[test]
    fn levy_sampler_matches_exponent() {
        let triplet = LevyTriplet {
            sigma2: 0.2,
            gamma: 0.5,
            jumps: vec![crate::distribution::Jump { at: 0.6, weight: 1.5 }, crate::distribution::Jump { at: -2.0, weight: 0.4 }],
            compensated: true,
        };
        let dist = DistributionSpec::Levy(triplet.scaled(1.1));
        let (emp, _) = estimate_law_channel(&z(), &dist, 100_000, 7).unwrap();
        let exact = exact_channel(&z(), &dist).unwrap();
        let dist = choi_trace_distance(&emp.choi().unwrap(), &exact.multiplier().choi().unwrap()).unwrap();
        assert!(dist <= 0.02, "{dist}");
    }

    #[test]
    fn finite_mixture_sampler() {
        let mix = DistributionSpec::mixture(&[(1.0, 0.25), (2.0, 0.75)]);
        let mut rng = shot_stream(40, 0);
        let n = 100_000;
        let twos = (0..n).filter(|_| sample_law(&mix, &mut rng).unwrap().0 == 2.0).count();
        assert!((twos as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn scaling_table_cases() {
        let rows = scaling_table(&[1.0, 10.0, 100.0, 1000.0], 0.01).unwrap();
        for r in &rows {
            assert!((r.cutoff_over_sqrt_t - S_001).abs() < 1e-12);
        }
        let rows = scaling_table(&[0.5, 3.0], 4.0 * (-2.0f64).exp()).unwrap();
        assert!(rows.iter().all(|r| (r.cutoff_over_sqrt_t - 2.0).abs() < 1e-12));
        assert!(scaling_table(&[1.0], 4.0 / std::f64::consts::E).is_err());
        let ratio = cutoff(1.0, 0.005).unwrap() / cutoff(1.0, 0.01).unwrap();
        assert!((ratio - 1.056_261_855_119_212_2).abs() < 1e-14);
        assert!(((800f64.ln() / 400f64.ln()).sqrt() - ratio).abs() < 1e-15);
        assert!(scaling_table(&[1.0, -1.0], 0.01).is_err());
    }

    #[test]
    fn mean_cost_grows_like_sqrt_t() {
        let mut prev: Option<f64> = None;
        for &t in &[1.0, 4.0, 16.0, 64.0] {
            let s = cutoff(t, 0.01).unwrap();
            let m = mean_abs_shift(t, s, 10_000, 3).unwrap();
            if let Some(p) = prev {
                assert!((m / p / 2.0 - 1.0).abs() < 0.05);
            }
            prev = Some(m);
        }
        let m1 = mean_abs_shift(1.0, S_001, 200_000, 4).unwrap();
        // E|s| for the t = 1 truncation, evaluated independently
        assert!((m1 - 0.796_317_393_203_454_2).abs() < 0.005);
    }

    #[test]
    fn empirical_error_decays_like_inverse_sqrt_shots() {
        let exact = gaussian_multiplier(&z(), 1.0).choi().unwrap();
        let mut logs = Vec::new();
        for &m in &[1_000usize, 10_000, 100_000] {
            let mut mean = 0.0;
            for seed in 0..20 {
                let plan = ShotPlan::new(1.0, 1e-9, m, 500 + seed).unwrap();
                let (emp, _) = estimate_channel(&z(), &plan).unwrap();
                mean += choi_trace_distance(&emp.choi().unwrap(), &exact).unwrap() / 20.0;
            }
            logs.push(((m as f64).log10(), mean.log10()));
        }
        let slope = (logs[2].1 - logs[0].1) / (logs[2].0 - logs[0].0);
        assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn empirical_apply_matches_shot_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = HermitianOperator::new(random_hermitian(2, 1.0, &mut rng)).unwrap();
        let rho = DensityMatrix::new(random_density_matrix(2, &mut rng)).unwrap();
        let plan = ShotPlan::new(0.5, 0.1, 64, 1).unwrap();
        let (emp, _) = estimate_channel(&h, &plan).unwrap();
        let mut avg = ComplexMatrix::zeros(2, 2);
        for i in 0..64 {
            avg = avg.try_add(run_shot(&h, &rho, &plan, i).unwrap().0.matrix()).unwrap();
        }
        let avg = avg.scale_real(1.0 / 64.0);
        assert!(emp.apply(&rho).unwrap().matrix().max_abs_diff(&avg).unwrap() < 1e-14);
    }
}
