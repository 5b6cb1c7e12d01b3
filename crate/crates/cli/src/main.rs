//! `coexist`: validate, convert and apply quantum operations stored as JSON
//! documents, and decide whether two of them coexist.

mod commands;
mod doc;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coexist::{SolverSettings, Strategy};

use commands::{Form, Options};
use failure::{Failure, EXIT_PARSE};

#[derive(Parser, Debug)]
#[command(name = "coexist", version, about)]
struct Cli {
    /// Accept a solver point whose worst constraint violation is at most this.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_feas: f64,
    /// Report infeasible when the stalled violation stays above this.
    #[arg(long, global = true, default_value_t = 1e-5)]
    tol_infeas: f64,
    /// Projection cycles before the solver gives up as undecided.
    #[arg(long, global = true, default_value_t = 20_000)]
    max_iter: usize,
    /// Repair inputs whose defects are at most 10 times the validation
    /// tolerance, and report each repair.
    #[arg(long, global = true)]
    lenient: bool,
    /// Pipeline used by `coexist`.
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Write the four-outcome witness instrument of a feasible decision here.
    #[arg(long, global = true, value_name = "PATH")]
    witness: Option<PathBuf>,
    /// Decide coexistence of the induced effects instead of the operations.
    #[arg(long, global = true)]
    effects_only: bool,
    /// Run `coexist` on every pair listed in a manifest file.
    #[arg(long, global = true, value_name = "MANIFEST")]
    batch: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an operation, state, effect or instrument document.
    Validate { input: PathBuf },
    /// Rewrite an operation document in Kraus or Choi form.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: FormArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the effect induced by an operation.
    Effect {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply an operation to a state: outcome probability and conditional state.
    Apply {
        input: PathBuf,
        state: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether two operations coexist.
    Coexist {
        #[arg(required_unless_present = "batch")]
        a: Option<PathBuf>,
        #[arg(required_unless_present = "batch")]
        b: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    ClosedFormOnly,
    SolverOnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormArg {
    Kraus,
    Choi,
}

fn run(cli: Cli) -> Result<commands::Output, Failure> {
    let opts = Options {
        settings: SolverSettings {
            tol_feas: cli.tol_feas,
            tol_infeas: cli.tol_infeas,
            max_iter: cli.max_iter,
            ..SolverSettings::default()
        },
        strategy: match cli.method {
            MethodArg::Auto => Strategy::Auto,
            MethodArg::ClosedFormOnly => Strategy::ClosedFormOnly,
            MethodArg::SolverOnly => Strategy::SolverOnly,
        },
        lenient: cli.lenient,
        effects_only: cli.effects_only,
        witness: cli.witness,
    };
    match cli.command {
        Command::Validate { input } => commands::validate(&input, &opts),
        Command::Convert { input, to, output } => {
            let form = match to {
                FormArg::Kraus => Form::Kraus,
                FormArg::Choi => Form::Choi,
            };
            commands::convert(&input, form, output.as_deref(), &opts)
        }
        Command::Effect { input, output } => commands::effect(&input, output.as_deref(), &opts),
        Command::Apply {
            input,
            state,
            output,
        } => commands::apply(&input, &state, output.as_deref(), &opts),
        Command::Coexist { a, b } => match (cli.batch, a, b) {
            (Some(manifest), None, None) => commands::batch(&manifest, &opts),
            (None, Some(a), Some(b)) => commands::coexist(&a, &b, &opts),
            _ => Err(Failure::Parse(
                "give either two operation files or --batch MANIFEST".into(),
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests succeed; every other command-line
            // problem is a parse error under the exit-code contract.
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
