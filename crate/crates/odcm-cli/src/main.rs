use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use odcm::commands::{
    cmd_robustness, cmd_solve, cmd_spectra, cmd_sweep, cmd_validate_mc, load_scenario,
};

/// Energy-constrained optimal dephasing control: solve, sweep, and validate
/// control-field modulations for a configured noise scenario.
#[derive(Parser)]
#[command(name = "odcm", version, about)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Scenario configuration file (JSON, version 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports, CSVs and SVGs.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweep points and seed batches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override for the stochastic seeds (Monte-Carlo seed, robustness base).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Verb {
    /// Solve the optimal modulation for a single energy.
    Solve,
    /// Run the configured energy sweep with DD comparison.
    Sweep,
    /// Emit the dephasing-spectrum / modulation-intensity overlay data.
    Spectra,
    /// Perturb the solved optimum and report the rate increase statistics.
    Robustness,
    /// Cross-check the rate quadrature against Monte-Carlo noise sampling.
    ValidateMc,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("config error: cannot build thread pool: {e}");
            return ExitCode::from(odcm::exit_code::CONFIG_ERROR as u8);
        }
    }

    let Some(config) = cli.config.as_deref() else {
        eprintln!("config error: --config <path> is required");
        return ExitCode::from(odcm::exit_code::CONFIG_ERROR as u8);
    };

    let scenario = match load_scenario(config, cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let result = match cli.verb {
        Verb::Solve => cmd_solve(scenario, &cli.out),
        Verb::Sweep => cmd_sweep(scenario, &cli.out),
        Verb::Spectra => cmd_spectra(scenario, &cli.out),
        Verb::Robustness => cmd_robustness(scenario, &cli.out, cli.seed),
        Verb::ValidateMc => cmd_validate_mc(scenario, &cli.out),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
