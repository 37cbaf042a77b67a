//! `mgstab`: build microgrid models, inspect their eigenvalues, sweep droop
//! gains, place poles and simulate step responses.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mgstab::network::Scope;

#[derive(Parser)]
#[command(name = "mgstab", version, about = "Small-signal analysis of hybrid AC/DC microgrids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a linear model from a grid config and write it as JSON.
    Model {
        #[arg(long)]
        config: PathBuf,
        /// dc, ac, hybrid or converter:<name>.
        #[arg(long, default_value = "hybrid")]
        scope: Scope,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the eigenvalues of a model as CSV.
    Eig {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the poles and the zeros of one input-output channel as CSV.
    Pz {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        output: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the DC droop gain and record the spectral abscissa per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "dc")]
        scope: Scope,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, allow_negative_numbers = true)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write one eigenvalue CSV per sweep point into this directory.
        #[arg(long)]
        full_dir: Option<PathBuf>,
    },
    /// Compute a state-feedback gain placing the closed-loop poles.
    Place {
        #[arg(long)]
        model: PathBuf,
        /// `auto` or a JSON file with `{"targets": [[re, im], ...]}`.
        #[arg(long, default_value = "auto")]
        targets: String,
        /// Minimum damping ratio for `--targets auto`.
        #[arg(long, default_value_t = 0.7, allow_negative_numbers = true)]
        zeta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unit step response of every state, optionally under state feedback.
    Step {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        gains: Option<PathBuf>,
        #[arg(long)]
        input: String,
        #[arg(long, allow_negative_numbers = true)]
        tfinal: f64,
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::Model { config, scope, out } => commands::model(&args, &config, &scope, &out),
        Command::Eig { model, out } => commands::eig(&args, &model, &out),
        Command::Pz {
            model,
            input,
            output,
            out,
        } => commands::pz(&args, &model, &input, &output, &out),
        Command::Sweep {
            config,
            scope,
            from,
            to,
            step,
            out,
            full_dir,
        } => commands::sweep(&args, &config, &scope, (from, to, step), &out, full_dir.as_deref()),
        Command::Place {
            model,
            targets,
            zeta,
            out,
        } => commands::place(&args, &model, &targets, zeta, &out),
        Command::Step {
            model,
            gains,
            input,
            tfinal,
            dt,
            out,
        } => commands::step(&args, &model, gains.as_deref(), &input, tfinal, dt, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mgstab: {e}");
            e.exit_code()
        }
    }
}
