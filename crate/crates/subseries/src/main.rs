//! Thin CLI over the library: decompose | train | ablate | synth | eval.
//!
//! Exit code 0 on success; on failure a machine-readable error JSON goes
//! to stderr. Log verbosity is controlled by `RUST_LOG` only.

use clap::{Args, Parser, Subcommand};
use subseries::harness::{self, EvalSplit, ExperimentConfig, Overrides};
use subseries::Error;

#[derive(Parser)]
#[command(
    name = "subseries",
    version,
    about = "Seasonal-trend forecasting with a hybrid loss"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: String,
    /// Override the config's output directory.
    #[arg(long)]
    output: Option<String>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict the sweep to one horizon from the config.
    #[arg(long)]
    horizon: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let config = ExperimentConfig::from_file(&self.config)?;
        Overrides {
            seed: self.seed,
            horizon: self.horizon,
            output_dir: self.output.clone(),
        }
        .apply(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split a CSV into per-channel original/seasonal/trend columns.
    Decompose {
        /// Input CSV (header row; optional date column).
        input: String,
        /// Moving-average window size (odd).
        #[arg(long, default_value_t = 25)]
        kernel: usize,
        /// Name of the date column to pass through, if any.
        #[arg(long)]
        date_column: Option<String>,
        /// Output CSV path.
        #[arg(long)]
        output: String,
    },
    /// Train one run per configured horizon and write reports.
    Train(RunArgs),
    /// Run the loss-variant and initial-weight ablations.
    Ablate(RunArgs),
    /// Generate a synthetic series from a spec JSON and write it as CSV.
    Synth {
        /// SynthSpec JSON path.
        #[arg(long)]
        spec: String,
        /// Output CSV path.
        #[arg(long)]
        output: String,
    },
    /// Evaluate a checkpoint on one data split and print the six metrics.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Model checkpoint JSON written by `train`.
        #[arg(long)]
        checkpoint: String,
        /// Which segment to evaluate: train | val | test.
        #[arg(long, default_value = "test")]
        split: String,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Decompose {
            input,
            kernel,
            date_column,
            output,
        } => {
            harness::decompose_to_csv(&input, date_column.as_deref(), kernel, &output)?;
            println!("wrote {output}");
        }
        Command::Train(args) => {
            let config = args.load()?;
            let sweep = harness::run_training(&config)?;
            println!("{}", serde_json::to_string_pretty(&sweep.aggregate)?);
        }
        Command::Ablate(args) => {
            let config = args.load()?;
            let report = harness::run_ablation(&config)?;
            for entry in report.variants.iter().chain(report.weight_grid.iter()) {
                println!(
                    "{:<24} overall mse {:.6} mae {:.6} | trend mse {:.6}",
                    entry.label,
                    entry.aggregate.overall_mse,
                    entry.aggregate.overall_mae,
                    entry.aggregate.trend_mse
                );
            }
        }
        Command::Synth { spec, output } => {
            harness::synth_to_csv(&spec, &output)?;
            println!("wrote {output}");
        }
        Command::Eval {
            run,
            checkpoint,
            split,
        } => {
            let config = run.load()?;
            let split: EvalSplit = split.parse()?;
            let metrics = harness::eval_checkpoint(&config, &checkpoint, split)?;
            println!("{}", serde_json::to_string_pretty(&metrics)?);
        }
    }
    Ok(())
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let payload = serde_json::json!({
            "error": { "kind": e.kind(), "message": e.to_string() }
        });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
