use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jcipa::cli::{exit_code, run, CliError, ConfigOverrides, RunReport, Scenario};

/// Population-inversion targets, coupling synthesis and forward
/// propagation for the Jaynes-Cummings model, written as CSV.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Scenario to run.
    #[arg(long)]
    scenario: Option<String>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    mean_n: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tail_tol: Option<f64>,
    /// Singularity threshold on 1 - W².
    #[arg(long)]
    eta: Option<f64>,
    /// Exit with status 2 when a residual outside the regularized windows
    /// exceeds this.
    #[arg(long)]
    max_residual: Option<f64>,
    /// Photon number of the Fock-state scenario.
    #[arg(long)]
    fock_n: Option<usize>,
    /// Validate and print the effective configuration without running.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = (|| -> Result<Option<RunReport>, CliError> {
        let file = match &args.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            scenario: args
                .scenario
                .as_deref()
                .map(str::parse::<Scenario>)
                .transpose()?,
            lambda0: args.lambda0,
            zeta: args.zeta,
            mean_n: args.mean_n,
            epsilon: args.epsilon,
            detuning: None,
            t_end: args.t_end,
            samples: args.samples,
            tail_tol: args.tail_tol,
            eta: args.eta,
            max_residual: args.max_residual,
            fock_n: args.fock_n,
            out: args.out.clone(),
        };
        let config = file.overlay(flags).resolve()?;
        for warning in config.warnings() {
            eprintln!("warning: {warning}");
        }
        if args.validate_only {
            print!("{}", config.render());
            return Ok(None);
        }
        run(&config).map(Some)
    })();

    match outcome {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            for path in &report.files {
                eprintln!("wrote {}", path.display());
            }
            if report.residual_exceeded() {
                eprintln!(
                    "error: max |residual| {:e} exceeds {:e}",
                    report.max_residual, report.residual_limit
                );
            }
            ExitCode::from(exit_code(&Ok(report)))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&Err(e)))
        }
    }
}
