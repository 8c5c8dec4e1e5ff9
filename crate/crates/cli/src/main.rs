use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use preisach::experiments::{self, ExperimentConfig, ExperimentKind};
use preisach::Error;

#[derive(Parser)]
#[command(name = "preisach", version, about = "Preisach hysteresis and feedforward compensation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Open-loop input sweep through the plant.
    Sweep(Common),
    /// Compensator driving the plant; writes loop, inverse map and error spectrum.
    Compensate(Common),
    /// Analytic loop-error magnitude and phase curves.
    Frf(Common),
    /// Single-relay phase-lag demonstration.
    Hysteron(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dotted `key=value` override, e.g. `mesh.n=200`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::UnstableLoop { .. } | Error::MeshMismatch => 2,
        Error::NonFinite(_) => 3,
        Error::InsufficientData(_) | Error::Io(_) => 1,
    }
}

fn execute(kind: ExperimentKind, args: &Common) -> Result<(), Error> {
    let config = ExperimentConfig::load(args.config.as_deref(), &args.overrides)?;
    let record = experiments::run(kind, &config)?;
    let files = experiments::write_outputs(&record, &args.out)?;
    for (name, value) in &record.metrics {
        println!("{name} = {value}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Compensate(a) => (ExperimentKind::Compensate, a),
        Command::Frf(a) => (ExperimentKind::Frf, a),
        Command::Hysteron(a) => (ExperimentKind::Hysteron, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("preisach {}: {e}", kind.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
