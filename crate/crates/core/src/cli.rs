//! The `simulate`, `verify`, `bench` and `qpe` commands.
//!
//! Each command returns a report value; the binary prints it and maps
//! errors to exit codes (1 for failed checks, 2 for bad input).

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::{choi_trace_distance, cptp_check, DensityMatrix, SchurMultiplier};
use crate::config::RunConfig;
use crate::cvqpe::{estimate_lambda, resolve_spectrum, QpeRun};
use crate::distribution::{DistributionSpec, Jump, LevyTriplet};
use crate::error::CliError;
use crate::hamiltonian::HermitianOperator;
use crate::io::{csv_float, write_matrix, write_text};
use crate::random::{random_density_matrix, random_hermitian, random_spectrum};
use crate::sampler::{cutoff, estimate_channel, estimate_law_channel, mean_abs_shift, tv_bound, ShotPlan};
use crate::twirl::{
    compound_poisson_multiplier, exact_channel, gaussian_evolution, gaussian_multiplier, hs_quadrature_check,
    vectorized_oracle,
};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "TWIRL_THREADS";

pub const METRICS_HEADER: &str = "mode,t,epsilon,S,shots,total_sim_time,choi_distance_to_exact,tv_bound,wall_seconds";
pub const BENCH_HEADER: &str = "t,epsilon,S,S_over_sqrt_t,mean_abs_s";
pub const QPE_HEADER: &str = "eigen_index,raw_mean,estimate,stderr,interval_low,interval_high,resolved_from_next";

/// Largest dimension for which the Choi distance to the exact channel is computed.
pub const EXACT_DISTANCE_MAX_DIM: usize = 16;

/// Largest dimension accepted by `verify`.
pub const VERIFY_MAX_DIM: usize = 16;

/// Thread count from [`THREADS_ENV`]; absent means one thread.
pub fn configured_threads() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
    }
}

/// One metrics row. Empty fields are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub mode: &'static str,
    pub t: f64,
    pub epsilon: Option<f64>,
    pub cutoff: Option<f64>,
    pub shots: Option<usize>,
    pub total_sim_time: Option<f64>,
    pub choi_distance_to_exact: Option<f64>,
    pub tv_bound: Option<f64>,
    pub wall_seconds: Option<f64>,
}

impl Metrics {
    pub fn csv_row(&self) -> String {
        [
            self.mode.to_string(),
            csv_float(Some(self.t)),
            csv_float(self.epsilon),
            csv_float(self.cutoff),
            self.shots.map_or_else(String::new, |m| m.to_string()),
            csv_float(self.total_sim_time),
            csv_float(self.choi_distance_to_exact),
            csv_float(self.tv_bound),
            csv_float(self.wall_seconds),
        ]
        .join(",")
    }

    pub fn to_csv(&self) -> String {
        format!("{METRICS_HEADER}\n{}\n", self.csv_row())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub state: DensityMatrix,
    pub metrics: Metrics,
}

/// Runs the exact channel (no shots) or the sampler (shots given) without
/// touching the filesystem.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation, CliError> {
    let start = Instant::now();
    let h = &cfg.hamiltonian;
    let rho = &cfg.initial_state;
    let law = cfg.distribution.at_time(cfg.t)?;
    let mut metrics = Metrics {
        mode: "exact",
        t: cfg.t,
        epsilon: cfg.epsilon,
        cutoff: None,
        shots: None,
        total_sim_time: None,
        choi_distance_to_exact: None,
        tv_bound: None,
        wall_seconds: None,
    };
    let state = match cfg.shots {
        None => {
            if cfg.t == 0.0 {
                rho.clone()
            } else {
                exact_channel(h, &law)?.apply(rho)?
            }
        }
        Some(shots) => {
            metrics.mode = "sampled";
            metrics.shots = Some(shots);
            let (emp, ledger) = match &law {
                DistributionSpec::Gaussian { variance } => {
                    let eps = cfg.epsilon.ok_or_else(|| CliError::Config("epsilon is required".into()))?;
                    let plan = ShotPlan::new(*variance, eps, shots, cfg.seed)?;
                    metrics.cutoff = Some(plan.cutoff);
                    if *variance > 0.0 {
                        metrics.tv_bound = Some(tv_bound(*variance, plan.cutoff)?);
                    }
                    estimate_channel(h, &plan)?
                }
                other => estimate_law_channel(h, other, shots, cfg.seed)?,
            };
            metrics.total_sim_time = Some(ledger.total_time);
            if cfg.dim <= EXACT_DISTANCE_MAX_DIM {
                let exact = exact_channel(h, &law)?;
                metrics.choi_distance_to_exact =
                    Some(choi_trace_distance(&emp.choi()?, &exact.multiplier().choi()?)?);
            }
            if cfg.t == 0.0 {
                rho.clone()
            } else {
                emp.apply(rho)?
            }
        }
    };
    if !cfg.omit_wall_time {
        metrics.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(Simulation { state, metrics })
}

/// [`simulate`] plus output files and a short summary on `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<Simulation, CliError> {
    let sim = simulate(cfg)?;
    if let Some(path) = &cfg.state_out {
        write_matrix(path, sim.state.matrix())?;
    }
    if let Some(path) = &cfg.metrics_out {
        write_text(path, &sim.metrics.to_csv())?;
    }
    writeln!(out, "{METRICS_HEADER}")?;
    writeln!(out, "{}", sim.metrics.csv_row())?;
    Ok(sim)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyRow {
    pub check: &'static str,
    pub dim: usize,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "{:<14} {:>4} {:>7}  {:<24} {:<24} {}\n",
            "check", "dim", "trials", "max_deviation", "tolerance", "status"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<14} {:>4} {:>7}  {:<24} {:<24} {}",
                r.check,
                r.dim,
                r.trials,
                format!("{:.16e}", r.max_deviation),
                format!("{:.16e}", r.tolerance),
                if r.passed { "PASS" } else { "FAIL" }
            );
        }
        let passed = self.rows.iter().filter(|r| r.passed).count();
        let _ = writeln!(s, "summary: {passed}/{} checks passed", self.rows.len());
        s
    }
}

/// One instance of every distribution variant for the CPTP sweep.
pub fn sample_distributions<R: Rng + ?Sized>(rng: &mut R) -> Vec<DistributionSpec> {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    let p = u(0.1, 0.9);
    vec![
        DistributionSpec::Gaussian { variance: u(0.0, 3.0) },
        DistributionSpec::TruncatedGaussian { variance: u(0.1, 3.0), cutoff: u(0.2, 5.0) },
        DistributionSpec::Dirac { at: u(-3.0, 3.0) },
        DistributionSpec::mixture(&[(u(-2.0, 2.0), p), (u(-2.0, 2.0), 1.0 - p)]),
        DistributionSpec::compound_poisson(u(0.0, 5.0), DistributionSpec::Gaussian { variance: u(0.1, 2.0) }),
        DistributionSpec::Levy(LevyTriplet {
            sigma2: u(0.0, 2.0),
            gamma: u(-1.0, 1.0),
            jumps: vec![Jump { at: u(0.1, 2.0), weight: u(0.1, 2.0) }, Jump { at: u(-2.0, -0.1), weight: u(0.1, 2.0) }],
            compensated: true,
        }),
    ]
}

/// Oracle-equivalence, semigroup, CPTP and quadrature checks on random
/// instances. `inject_fault` scales the multiplier diagonals by 0.9 before
/// the CPTP check.
pub fn cmd_verify(dims: &[usize], trials: usize, seed: u64, inject_fault: bool) -> Result<VerifyReport, CliError> {
    if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > VERIFY_MAX_DIM) {
        return Err(CliError::Config(format!("verify dimensions must lie in 1..={VERIFY_MAX_DIM}, got {d}")));
    }
    if trials == 0 {
        return Err(CliError::Config("verify needs at least one trial".into()));
    }
    let mut rows = Vec::new();
    for &d in dims {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(d as u64);
        let mut oracle = 0.0f64;
        let mut semigroup = 0.0f64;
        let mut cp_dev = 0.0f64;
        let mut tp_dev = 0.0f64;
        let mut cp_ok = true;
        let mut tp_ok = true;
        let mut quad = 0.0f64;
        for _ in 0..trials {
            let norm = 0.5 + 1.5 * rng.random::<f64>();
            let h = HermitianOperator::new(random_hermitian(d, norm, &mut rng))?;
            let rho = DensityMatrix::new(random_density_matrix(d, &mut rng))?;
            let t = 2.0 * rng.random::<f64>();
            let a = gaussian_evolution(&h, &rho, t)?;
            let b = vectorized_oracle(&h, &rho, t)?;
            oracle = oracle.max(a.matrix().max_abs_diff(b.matrix())?);

            let spec = HermitianOperator::diagonal(&random_spectrum(d, 4.0, &mut rng))?;
            let (t1, t2) = (rng.random::<f64>(), rng.random::<f64>());
            let g = gaussian_multiplier(&spec, t1).then(&gaussian_multiplier(&spec, t2))?;
            semigroup = semigroup.max(g.multiplier().max_abs_diff(gaussian_multiplier(&spec, t1 + t2).multiplier())?);
            let base = DistributionSpec::mixture(&[(0.7, 0.5), (-1.1, 0.5)]);
            let c = compound_poisson_multiplier(&spec, &base, t1)?.then(&compound_poisson_multiplier(&spec, &base, t2)?)?;
            let c12 = compound_poisson_multiplier(&spec, &base, t1 + t2)?;
            semigroup = semigroup.max(c.multiplier().max_abs_diff(c12.multiplier())?);

            for dist in sample_distributions(&mut rng) {
                let mut m = exact_channel(&spec, &dist)?.multiplier().clone();
                if inject_fault {
                    let mut mm = m.multiplier().clone();
                    for j in 0..d {
                        mm[(j, j)] *= 0.9;
                    }
                    m = SchurMultiplier::new(m.basis().clone(), mm)?;
                }
                let report = cptp_check(&m);
                cp_ok &= report.is_cp;
                tp_ok &= report.is_tp;
                cp_dev = cp_dev.max((-report.min_eigenvalue).max(0.0));
                tp_dev = tp_dev.max(report.max_diag_deviation);
            }

            let hq = HermitianOperator::new(random_hermitian(d, 2.0 * rng.random::<f64>(), &mut rng))?;
            let tq = 4.0 * (1.0 - rng.random::<f64>());
            quad = quad.max(hs_quadrature_check(&hq, tq, 64)?);
        }
        let row = |check, dev: f64, tol: f64, ok: bool| VerifyRow {
            check,
            dim: d,
            trials,
            max_deviation: dev,
            tolerance: tol,
            passed: ok && dev <= tol,
        };
        rows.push(row("oracle", oracle, 1e-10, true));
        rows.push(row("semigroup", semigroup, 1e-12, true));
        rows.push(row("cp", cp_dev, crate::channels::PSD_TOL, cp_ok));
        rows.push(row("tp", tp_dev, crate::channels::TP_TOL, tp_ok));
        rows.push(row("hs_quadrature", quad, 1e-8, true));
    }
    Ok(VerifyReport { rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub t: f64,
    pub epsilon: f64,
    pub cutoff: f64,
    pub cutoff_over_sqrt_t: f64,
    pub mean_abs_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{BENCH_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                csv_float(Some(r.t)),
                csv_float(Some(r.epsilon)),
                csv_float(Some(r.cutoff)),
                csv_float(Some(r.cutoff_over_sqrt_t)),
                csv_float(Some(r.mean_abs_s))
            );
        }
        s
    }
}

/// Tolerance on the constancy of `S/√t` across `t`.
pub const BENCH_CONSTANCY_TOL: f64 = 1e-12;

/// Scaling table over the `(t, ε)` grid, with mean `|s|` over `draws`
/// draws per row. Fails unless `S/√t` equals `√(2 ln(4/ε))` in every row.
pub fn cmd_bench(ts: &[f64], epsilons: &[f64], draws: usize, seed: u64) -> Result<BenchReport, CliError> {
    if ts.is_empty() || epsilons.is_empty() {
        return Err(CliError::Config("bench needs nonempty t and epsilon grids".into()));
    }
    let mut rows = Vec::new();
    for &eps in epsilons {
        let expected = (2.0 * (4.0 / eps).ln()).sqrt();
        for &t in ts {
            let s = cutoff(t, eps)?;
            let ratio = s / t.sqrt();
            // a fresh seed per row keeps rows statistically independent
            let mean_abs_s = mean_abs_shift(t, s, draws, seed.wrapping_add(rows.len() as u64))?;
            rows.push(BenchRow { t, epsilon: eps, cutoff: s, cutoff_over_sqrt_t: ratio, mean_abs_s });
            if (ratio - expected).abs() > BENCH_CONSTANCY_TOL {
                return Err(CliError::Failed(format!(
                    "S/sqrt(t) = {ratio:.17e} at t = {t}, eps = {eps} differs from {expected:.17e}"
                )));
            }
        }
    }
    Ok(BenchReport { rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpeReport {
    pub runs: Vec<QpeRun>,
    /// Whether each run is separated from the next by more than 5 combined
    /// standard errors; `None` for the last run or a single-index query.
    pub resolved_from_next: Vec<Option<bool>>,
}

impl QpeReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{QPE_HEADER}\n");
        for (r, res) in self.runs.iter().zip(&self.resolved_from_next) {
            let (lo, hi) = r.interval();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.eigen_index,
                csv_float(Some(r.raw_mean)),
                csv_float(Some(r.estimate)),
                csv_float(Some(r.stderr)),
                csv_float(Some(lo)),
                csv_float(Some(hi)),
                res.map_or_else(String::new, |b| b.to_string())
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            let (lo, hi) = r.interval();
            let _ = writeln!(
                s,
                "eigen index {}: estimate {:.10} +/- {:.3e} (raw mean {:.10}, 5-sigma interval [{:.10}, {:.10}])",
                r.eigen_index, r.estimate, r.stderr, r.raw_mean, lo, hi
            );
        }
        s
    }
}

/// Phase-estimation readout for one eigen index, or for all of them.
pub fn cmd_qpe(
    h: &HermitianOperator,
    eigen_index: Option<usize>,
    t: f64,
    shots: usize,
    seed: u64,
) -> Result<QpeReport, CliError> {
    match eigen_index {
        Some(i) => Ok(QpeReport { runs: vec![estimate_lambda(h, i, t, shots, seed)?], resolved_from_next: vec![None] }),
        None => {
            let report = resolve_spectrum(h, t, shots, seed)?;
            let mut resolved: Vec<Option<bool>> = report.resolved.into_iter().map(Some).collect();
            resolved.push(None);
            Ok(QpeReport { runs: report.runs, resolved_from_next: resolved })
        }
    }
}

/// Writes `text` to `path` when given.
pub fn write_optional(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;
    use crate::linalg::pauli;

    const CFG: &str = r#"
[system]
qubits = 1
[hamiltonian]
pauli = "1.0 Z"
[initial_state]
preset = "plus_all"
[evolution]
t = 1.0
epsilon = 0.01
"#;

    fn cfg(extra: &str, o: Overrides) -> RunConfig {
        RunConfig::from_toml_str(&format!("{CFG}{extra}"), Path::new("."), &o).unwrap()
    }

    #[test]
    fn exact_simulation() {
        let sim = simulate(&cfg("", Overrides { omit_wall_time: true, ..Default::default() })).unwrap();
        let off = sim.state.matrix()[(0, 1)];
        assert!((off.re - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(
            sim.metrics.to_csv(),
            format!("{METRICS_HEADER}\nexact,1.0000000000000000e0,1.0000000000000000e-2,,,,,,\n")
        );
    }

    #[test]
    fn sampled_simulation_metrics() {
        let o = Overrides { shots: Some(2000), seed: Some(3), omit_wall_time: true, ..Default::default() };
        let sim = simulate(&cfg("", o)).unwrap();
        let m = &sim.metrics;
        assert_eq!(m.mode, "sampled");
        assert_eq!(m.shots, Some(2000));
        assert!((m.cutoff.unwrap() - 3.461_636_765_204_570_8).abs() < 1e-15);
        assert!(m.tv_bound.unwrap() <= 0.005);
        assert!(m.choi_distance_to_exact.unwrap() < 0.2);
        assert!(m.total_sim_time.unwrap() > 0.0);
        assert_eq!(m.wall_seconds, None);
        assert_eq!(m.csv_row().split(',').count(), 9);
    }

    #[test]
    fn zero_time_is_bit_exact() {
        for shots in [None, Some(10)] {
            let o = Overrides { t: Some(0.0), shots, ..Default::default() };
            let c = cfg("", o);
            assert_eq!(simulate(&c).unwrap().state, c.initial_state);
        }
    }

    #[test]
    fn compound_simulation() {
        let extra = "distribution = { kind = \"compound_poisson\", rate = 1.0, base = { kind = \"dirac\", at = 3.141592653589793 } }\n";
        let text = format!("{CFG}{extra}");
        let o = Overrides { shots: Some(5000), omit_wall_time: true, ..Default::default() };
        let c = RunConfig::from_toml_str(&text, Path::new("."), &o).unwrap();
        let sim = simulate(&c).unwrap();
        assert!(sim.metrics.choi_distance_to_exact.unwrap() < 1e-10);
        assert_eq!(sim.metrics.cutoff, None);
        assert!(sim.state.matrix().max_abs_diff(c.initial_state.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn verify_default_and_fault() {
        let report = cmd_verify(&[2, 4], 5, 1, false).unwrap();
        assert!(report.all_passed(), "{}", report.render());
        assert_eq!(report.render(), cmd_verify(&[2, 4], 5, 1, false).unwrap().render());
        let faulty = cmd_verify(&[2], 3, 1, true).unwrap();
        assert!(!faulty.all_passed());
        let tp = faulty.rows.iter().find(|r| r.check == "tp").unwrap();
        assert!(!tp.passed);
        assert!((tp.max_deviation - 0.1).abs() < 1e-12);
        assert!(cmd_verify(&[32], 1, 1, false).is_err());
    }

    #[test]
    fn bench_table() {
        let report = cmd_bench(&[1.0, 100.0], &[0.01, 0.1], 2000, 4).unwrap();
        assert_eq!(report.rows.len(), 4);
        let csv = report.to_csv();
        assert!(csv.starts_with("t,epsilon,S,S_over_sqrt_t,mean_abs_s\n"));
        let r = report.rows[1];
        assert!((r.cutoff_over_sqrt_t - 3.461_636_765_204_570_8).abs() < 1e-12);
        assert!(report.rows[2].cutoff_over_sqrt_t < report.rows[0].cutoff_over_sqrt_t);
        assert!(cmd_bench(&[-1.0], &[0.01], 10, 1).is_err());
    }

    #[test]
    fn qpe_reports() {
        let z = HermitianOperator::new(pauli::z()).unwrap();
        let report = cmd_qpe(&z, None, 1.0, 10_000, 1).unwrap();
        assert_eq!(report.runs.len(), 2);
        assert!((report.runs[0].estimate + 1.0).abs() < 0.025);
        assert!((report.runs[1].estimate - 1.0).abs() < 0.025);
        assert_eq!(report.resolved_from_next, vec![Some(true), None]);
        assert_eq!(report.to_csv().lines().count(), 3);
        let one = HermitianOperator::diagonal(&[0.3]).unwrap();
        assert_eq!(cmd_qpe(&one, None, 1.0, 100, 1).unwrap().runs.len(), 1);
        let err = cmd_qpe(&z, Some(0), 1.0, 1, 1).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("M >= 2"));
    }

    #[test]
    fn thread_env_parsing() {
        // only the absent case is safe to test without touching the process environment
        if std::env::var(THREADS_ENV).is_err() {
            assert_eq!(configured_threads().unwrap(), 1);
        }
    }
}
