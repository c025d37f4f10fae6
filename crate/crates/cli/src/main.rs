use std::path::PathBuf;
use std::process::ExitCode;

use alcove_cli::experiments::{self, Experiment};
use alcove_cli::{ExperimentConfig, Status};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alcove", version, about = "Affine path transform experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cascades of one Brownian path, evaluated on every coroot
    Figures(Common),
    /// Explosion metric of the Pitman and corrected cascades over 20 seeds
    Explosion(Common),
    /// Convergence suite for the walk and its string coordinates
    Converge(Common),
    /// Report-only probes of the limiting string coordinates
    Hypotheses(Common),
    /// Module catalog self-tests
    Cones(Common),
    /// Harmonic function checks and the conditioned process
    Harmonic(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `seed` from the config file
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `out` from the config file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match cli.command {
        Command::Figures(c) => (Experiment::Figures, c),
        Command::Explosion(c) => (Experiment::Explosion, c),
        Command::Converge(c) => (Experiment::Converge, c),
        Command::Hypotheses(c) => (Experiment::Hypotheses, c),
        Command::Cones(c) => (Experiment::Cones, c),
        Command::Harmonic(c) => (Experiment::Harmonic, c),
    };
    let mut config = match ExperimentConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = common.out {
        config.out = out;
    }
    let report = match experiments::run(experiment, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for c in &report.checks {
        let value = c.value.map_or_else(|| "-".into(), |v| format!("{v:.4e}"));
        let threshold = c.threshold.as_deref().unwrap_or("");
        println!(
            "{:<12} {:<64} {value:>12}  {threshold}",
            c.status.label(),
            c.name
        );
        if c.status == Status::Error {
            println!("             {}", c.detail);
        }
    }
    println!(
        "{} {} -> {}",
        report.status.label(),
        experiment.name(),
        experiment.output_dir(&config).display()
    );
    ExitCode::from(report.status.exit_code() as u8)
}
