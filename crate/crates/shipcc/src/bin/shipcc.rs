//! Thin command-line front end over the `shipcc` library: config-driven
//! simulation, data generation, training, evaluation, closed-loop control,
//! and the packaged studies.

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use shipcc::cli::{self, ExperimentKind};
use shipcc::config::RunConfig;
use shipcc::plant::ParamVariant;

#[derive(Parser)]
#[command(
    name = "shipcc",
    about = "Shipboard carbon-capture plant simulation, hybrid modeling, and economic predictive control",
    version
)]
struct Args {
    /// TOML config file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Parameter set: truth or imperfect.
    #[arg(long, global = true)]
    param_set: Option<String>,

    /// Worker threads (0 = auto).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory root.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant open loop under scenario excitation.
    Simulate,
    /// Generate a one-step dataset with model-mismatch labels.
    GenData,
    /// Build the dataset and train the hybrid networks (and baselines).
    Train,
    /// Score trained checkpoints on a fresh evaluation trajectory.
    Evaluate {
        /// Run directory produced by `train`.
        #[arg(long)]
        from: PathBuf,
    },
    /// Closed-loop control comparison using trained checkpoints.
    Control {
        /// Run directory produced by `train`.
        #[arg(long)]
        from: PathBuf,
    },
    /// Run a packaged study end to end.
    Experiment {
        /// caseI-modeling | caseII-modeling | data-efficiency | control-comparison
        which: String,
    },
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();

    let (mut cfg, mut text) = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => (RunConfig::default(), String::new()),
    };
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(ps) = &args.param_set {
        cli::apply_param_set_override(&mut cfg, Some(ps.parse::<ParamVariant>()?));
    }
    if let Some(w) = args.workers {
        cfg.run.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.run.out_dir = out.clone();
    }
    // Overrides participate in the config hash so distinct settings land in
    // distinct run directories.
    if args.seed.is_some() || args.param_set.is_some() || args.out.is_some() || text.is_empty() {
        text = cfg.to_toml()?;
    }
    cli::init_workers(cfg.run.workers);

    let out_dir = match args.command {
        Command::Simulate => cli::cmd_simulate(&cfg, &text)?,
        Command::GenData => cli::cmd_gen_data(&cfg, &text)?,
        Command::Train => cli::cmd_train(&cfg, &text)?,
        Command::Evaluate { from } => cli::cmd_evaluate(&cfg, &text, &from)?,
        Command::Control { from } => cli::cmd_control(&cfg, &text, &from)?,
        Command::Experiment { which } => {
            let kind: ExperimentKind = which.parse()?;
            cli::cmd_experiment(&cfg, &text, kind)?
        }
    };
    println!("artifacts written to {}", out_dir.display());
    Ok(())
}
