use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use parasol_cli::config::parse_config;
use parasol_cli::pipelines::{self, Pipeline};
use parasol_cli::CliError;

/// Numerical toolkit for time-periodic states of semilinear heat flows.
#[derive(Parser)]
#[command(name = "parasol", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path of the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory the outputs and manifest are written into.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed from the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. The toolkit is single-threaded; only 1 is accepted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a fixed point of the one-period evolution map.
    SolvePeriodic(CommonArgs),
    /// Track fixed points along a decreasing sequence of time scalings.
    LambdaSweep(CommonArgs),
    /// Probe spheres of initial states for nontrivial fixed points.
    AprioriSweep(CommonArgs),
    /// Eigenvalues and Morse index of an averaged-slope Schrodinger operator.
    Spectrum(CommonArgs),
    /// Compare rapidly forced evolutions with the time-averaged flow.
    Averaging(CommonArgs),
    /// Fit spatial tail offsets of a trajectory against the decay envelope.
    Tails(CommonArgs),
    /// Measure the contraction ratio of the flow between two states.
    Contraction(CommonArgs),
    /// Grade the structural hypotheses of the solvability statements.
    CheckHypotheses(CommonArgs),
    /// Run the full pipeline: hypotheses, spectra, periodic solve, tails.
    Demo(CommonArgs),
}

impl Command {
    fn split(self) -> (Pipeline, CommonArgs) {
        match self {
            Command::SolvePeriodic(a) => (Pipeline::SolvePeriodic, a),
            Command::LambdaSweep(a) => (Pipeline::LambdaSweep, a),
            Command::AprioriSweep(a) => (Pipeline::AprioriSweep, a),
            Command::Spectrum(a) => (Pipeline::Spectrum, a),
            Command::Averaging(a) => (Pipeline::Averaging, a),
            Command::Tails(a) => (Pipeline::Tails, a),
            Command::Contraction(a) => (Pipeline::Contraction, a),
            Command::CheckHypotheses(a) => (Pipeline::CheckHypotheses, a),
            Command::Demo(a) => (Pipeline::Demo, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (pipeline, args) = cli.command.split();
    match run(pipeline, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(pipeline: Pipeline, args: &CommonArgs) -> Result<(), CliError> {
    if let Some(threads) = args.threads {
        if threads != 1 {
            return Err(CliError::Config(format!(
                "--threads: the toolkit runs single-threaded, got {threads}"
            )));
        }
    }
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let manifest = pipelines::execute(&config, &text, pipeline, &args.out)?;
    println!(
        "{}: wrote {} files to {}",
        pipeline.name(),
        manifest.files.len() + 1,
        args.out.display()
    );
    Ok(())
}
