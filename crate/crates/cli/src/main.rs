use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tavg_cli::commands::{self, InvertPaths};
use tavg_cli::error::{EXIT_INPUT, EXIT_OK};
use tavg_cli::{CliResult, Outcome, RunConfig, Session};

/// Recover a diffusion process from time-averaged observations.
///
/// Exit codes: 0 ok, 2 multiplier bound violated, 3 input error,
/// 4 ill-posed weight.
#[derive(Parser)]
#[command(name = "tavg", version)]
struct Cli {
    /// Configuration file; without one the default setup is used
    /// (L = 2pi, T = 0.1, q = 0, w = 1, N = 300, 1025 nodes).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, multipliers and the stability band per mode.
    Spectrum {
        /// For an ill-posed weight, print the amplification table anyway
        /// (the exit code stays 4).
        #[arg(long)]
        diagnostics: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve the forward problem from an initial state.
    Forward {
        #[arg(long)]
        xi: PathBuf,
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Propagator name (see `tavg list`).
        #[arg(long)]
        method: Option<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Recover the solution from averaged data.
    Invert {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the recovered initial state.
        #[arg(long)]
        xi_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recover from a perturbed observation and plot against the exact one.
    ///
    /// The truncation defaults to N = 300; set `modes` in [figure1] to
    /// override it for this command only.
    Figure1 {
        #[arg(long, default_value = "figure1")]
        out_dir: PathBuf,
    },
    /// Finite-difference reference solution and its weighted average.
    Oracle {
        #[arg(long)]
        xi: PathBuf,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        average: PathBuf,
    },
    /// Registered eigensolvers and propagators.
    List,
}

fn run(cli: Cli) -> CliResult<Outcome> {
    if let Command::List = cli.command {
        return Ok(commands::list());
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let session = Session::new(cfg)?;
    match cli.command {
        Command::Spectrum { diagnostics, out } => {
            let mut outcome = commands::spectrum(&session, diagnostics)?;
            if let Some(p) = out {
                std::fs::write(&p, &outcome.stdout).map_err(|e| tavg_cli::CliError::io(p, e))?;
                outcome.stdout.clear();
            }
            Ok(outcome)
        }
        Command::Forward { xi, phi, method, out } => {
            commands::forward(&session, &xi, phi.as_deref(), method.as_deref(), &out)
        }
        Command::Invert {
            mu,
            phi,
            out,
            xi_out,
            report,
        } => commands::invert(
            &session,
            &InvertPaths {
                mu,
                phi,
                out,
                xi_out,
                report,
            },
        ),
        Command::Figure1 { out_dir } => commands::figure1(&session, &out_dir),
        Command::Oracle { xi, phi, out, average } => {
            commands::oracle(&session, &xi, phi.as_deref(), &out, &average)
        }
        Command::List => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            eprint!("{}", outcome.stderr);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
