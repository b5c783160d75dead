use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superint::commands::format_config_errors;
use superint::{exit, ExperimentConfig, Purpose, RunError};

#[derive(Parser)]
#[command(name = "superint", version, about = "Superintegrable-potential experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory; write it as CSV plus a drift summary.
    Simulate(Args),
    /// Run the residual and identity suite; write a JSON report.
    Verify(Args),
    /// Search a trajectory for its first return to the initial state.
    Closure(Args),
}

#[derive(clap::Args)]
struct Args {
    /// TOML experiment configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Override `[output] directory`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, RunError> {
    let (args, purpose) = match &cli.command {
        Command::Simulate(a) => (a, Purpose::Simulate),
        Command::Verify(a) => (a, Purpose::Verify),
        Command::Closure(a) => (a, Purpose::Closure),
    };
    let mut cfg = ExperimentConfig::load(&args.config, purpose).map_err(RunError::Config)?;
    if let Some(dir) = &args.output {
        cfg.output.directory = dir.clone();
    }
    superint::init_workers();
    match purpose {
        Purpose::Simulate => {
            let out = superint::simulate(&cfg)?;
            let s = &out.summary;
            println!(
                "{} rows, {} steps, max drift {:.3e}, {} of 4 invariants under {:.0e}",
                s.rows,
                s.steps,
                out.drift.max_drift(),
                s.invariants_under_threshold,
                s.drift_threshold
            );
            if let Some(t) = &s.truncated {
                eprintln!("truncated at t = {} (clearance {:.3e})", t.t, t.clearance);
            }
            Ok(out.exit_code)
        }
        Purpose::Verify => {
            let out = superint::verify(&cfg)?;
            for c in out.report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {:.3e} (threshold {:.0e})", c.name, c.value, c.threshold);
            }
            println!("{} passed, {} failed", out.report.passed, out.report.failed);
            Ok(out.exit_code)
        }
        Purpose::Closure => {
            let out = superint::closure(&cfg)?;
            let d = &out.document;
            println!(
                "{}: period {:.9}, return distance {:.3e}, horizon {:.6} (required {:.6})",
                d.verdict, d.period_estimate, d.return_distance, d.horizon_used, d.horizon_required
            );
            Ok(out.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(RunError::Config(errors)) => {
            eprintln!("invalid configuration:\n{}", format_config_errors(&errors));
            exit::CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
