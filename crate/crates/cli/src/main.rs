//! Command-line entry point: scenario simulation, stream analysis, state
//! tomography, phase-lock simulation, and consolidated reporting.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stream I/O error,
//! 4 tomography input error, 5 missing report inputs.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STREAM: i32 = 3;
pub const EXIT_TOMO_INPUT: i32 = 4;
pub const EXIT_MISSING_ARTIFACTS: i32 = 5;

/// Simulator and analysis bench for narrowband polarization-entangled
/// photon-pair experiments.
#[derive(Parser)]
#[command(name = "biphoton-bench", version, about)]
struct Cli {
    /// Output directory (defaults to $BIPHOTON_BENCH_OUT or ".")
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize time-tag streams from a scenario config.
    Simulate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Also write the CSV alternative of the time tags.
        #[arg(long)]
        csv: bool,
    },
    /// Correlation analysis of a time-tag file.
    Analyze {
        /// Merged time-tag file (.ttbin binary or .csv).
        #[arg(long)]
        streams: PathBuf,
        /// Histogram bin width (ns).
        #[arg(long, default_value_t = 1)]
        bin_ns: u64,
        /// Delay range as lo:hi (ns).
        #[arg(long, default_value = "-200:1400", allow_hyphen_values = true)]
        range_ns: String,
        /// Single-window integration width (ns).
        #[arg(long, default_value_t = 300)]
        window_ns: u64,
        /// Marginal autocorrelation used for the Cauchy-Schwarz report
        /// (chaotic marginals give 2.0; the synthetic pair process has
        /// Poissonian marginals, so this is an assumption, reported as such).
        #[arg(long, default_value_t = 2.0)]
        auto_g2: f64,
    },
    /// Sixteen-projection tomography: reconstruct from counts, simulate from
    /// a config, or evaluate a bundled reference fixture.
    Tomo {
        /// Scenario TOML (simulates counts, then reconstructs).
        #[arg(long, conflicts_with_all = ["counts", "fixture"])]
        config: Option<PathBuf>,
        /// Counts CSV: setting_id,qwp_s,hwp_s,qwp_as,hwp_as,counts.
        #[arg(long, conflicts_with = "fixture")]
        counts: Option<PathBuf>,
        /// Bundled reference matrix: psi_plus|psi_minus|phi_plus|phi_minus.
        #[arg(long)]
        fixture: Option<String>,
        /// Bell state the fidelity is reported against.
        #[arg(long)]
        target: Option<String>,
        /// Parametric bootstrap resamples (0 disables).
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Phase-lock simulation and lock-point calibration table.
    Lock {
        /// Scenario TOML with a [lock] section.
        #[arg(long)]
        config: PathBuf,
    },
    /// Consolidate prior command outputs into a comparison report.
    Report {
        /// Directory holding stats.json / tomo_report*.json / lock_report.json.
        #[arg(long)]
        artifact_dir: PathBuf,
    },
}

fn out_dir(cli_dir: &Option<PathBuf>) -> PathBuf {
    cli_dir
        .clone()
        .or_else(|| std::env::var_os("BIPHOTON_BENCH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() {
    let cli = Cli::parse();
    let dir = out_dir(&cli.out_dir);
    let result: Result<(), (i32, anyhow::Error)> = match cli.command {
        Command::Simulate { config, csv } => commands::simulate::run(&config, &dir, cli.seed, csv),
        Command::Analyze {
            streams,
            bin_ns,
            range_ns,
            window_ns,
            auto_g2,
        } => commands::analyze::run(&streams, &dir, bin_ns, &range_ns, window_ns, auto_g2),
        Command::Tomo {
            config,
            counts,
            fixture,
            target,
            bootstrap,
        } => commands::tomo::run(
            config.as_deref(),
            counts.as_deref(),
            fixture.as_deref(),
            target.as_deref(),
            bootstrap,
            &dir,
            cli.seed,
        ),
        Command::Lock { config } => commands::lock::run(&config, &dir, cli.seed),
        Command::Report { artifact_dir } => commands::report::run(&artifact_dir, &dir),
    };
    if let Err((code, err)) = result {
        eprintln!("error: {err:#}");
        std::process::exit(code);
    }
}
