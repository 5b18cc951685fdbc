use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twirl::cli::{cmd_bench, cmd_qpe, cmd_simulate, cmd_verify, configured_threads, write_optional};
use twirl::config::{load_hamiltonian, Overrides, RawConfig, RunConfig};
use twirl::io::parse_pauli_sum;
use twirl::{CliError, HermitianOperator};

/// Lindbladian simulation by Hamiltonian twirling.
///
/// The worker thread count is read from TWIRL_THREADS (default 1).
/// Exit codes: 0 success, 1 failed check, 2 configuration or parse error.
#[derive(Parser)]
#[command(name = "twirl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the exact twirl channel, or sample it when shots are given.
    Simulate {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Ignore any configured shots and run the exact channel.
        #[arg(long, conflicts_with = "shots")]
        exact: bool,
        #[arg(long)]
        state_out: Option<PathBuf>,
        #[arg(long)]
        metrics_out: Option<PathBuf>,
        /// Leave the wall_seconds column empty so reruns are byte-identical.
        #[arg(long)]
        omit_wall_time: bool,
    },
    /// Oracle-equivalence, semigroup, CPTP and quadrature checks on random instances.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scale multiplier diagonals by 0.9 before the CPTP check.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Cutoff scaling table: t, epsilon, S, S/sqrt(t), mean |s|.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0f64, 10.0, 100.0, 1000.0])]
        ts: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01f64])]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emulated continuous-variable phase estimation of eigenvalues.
    Qpe {
        /// Run configuration supplying [system] and [hamiltonian].
        #[arg(long, conflicts_with = "pauli")]
        config: Option<PathBuf>,
        /// Inline Pauli sum, e.g. "1.0 Z".
        #[arg(long)]
        pauli: Option<String>,
        /// Eigen index in ascending order; all indices when absent.
        #[arg(long)]
        eigen_index: Option<usize>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        shots: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn qpe_hamiltonian(config: Option<PathBuf>, pauli: Option<String>) -> Result<HermitianOperator, CliError> {
    match (config, pauli) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let raw = RawConfig::from_toml(&text)?;
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            load_hamiltonian(&raw.system, &raw.hamiltonian, &base)
        }
        (None, Some(text)) => parse_pauli_sum(&text),
        _ => Err(CliError::Config("qpe needs exactly one of --config or --pauli".into())),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Simulate { config, t, epsilon, shots, seed, exact, state_out, metrics_out, omit_wall_time } => {
            let overrides = Overrides { t, epsilon, shots, seed, exact, state_out, metrics_out, omit_wall_time };
            let cfg = RunConfig::load(&config, &overrides)?;
            cmd_simulate(&cfg, &mut stdout)?;
        }
        Command::Verify { dims, trials, seed, inject_fault } => {
            let report = cmd_verify(&dims, trials, seed, inject_fault)?;
            write!(stdout, "{}", report.render())?;
            if !report.all_passed() {
                return Err(CliError::Failed("one or more verification checks failed".into()));
            }
        }
        Command::Bench { ts, epsilons, draws, seed, out } => {
            let report = cmd_bench(&ts, &epsilons, draws, seed)?;
            let csv = report.to_csv();
            match out {
                Some(path) => write_optional(Some(&path), &csv)?,
                None => write!(stdout, "{csv}")?,
            }
        }
        Command::Qpe { config, pauli, eigen_index, t, shots, seed, csv } => {
            let h = qpe_hamiltonian(config, pauli)?;
            let report = cmd_qpe(&h, eigen_index, t, shots, seed)?;
            write!(stdout, "{}", report.summary())?;
            write_optional(csv.as_deref(), &report.to_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configured_threads().and_then(|threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| run(cli.command))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
