use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use swarm_core::comm::InvocationSchedule;
use swarm_core::harness::{self, Baseline, RunConfig};
use swarm_core::Result;

#[derive(Debug, Parser)]
#[command(name = "swarm", version, about = "Train and evaluate well-formed swarm pursuit avoidance")]
struct Cli {
    /// TOML run configuration; overrides the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in configuration used when no --config is given.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for checkpoints, logs and CSVs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RAN, CE, LF, AT, IL or IA.
    #[arg(long, global = true)]
    baseline: Option<Baseline>,
    /// Evaluation episodes.
    #[arg(long, global = true)]
    episodes: Option<usize>,
    /// every-step, every-k:<k> or on-boundary.
    #[arg(long, global = true)]
    invocation: Option<InvocationSchedule>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train the formation policy of one pattern (all patterns if omitted).
    TrainFormation {
        /// Pattern size, e.g. 4.
        #[arg(long)]
        pattern: Option<usize>,
        /// PPO iterations; defaults to the configured count.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Distill the formation policies into one student.
    Distill,
    /// Imitation-learn the division policy.
    TrainDivision,
    /// Fine-tune the student under learned and central division.
    AltTrain,
    /// Evaluate a baseline.
    Evaluate,
    /// Communication-overhead table.
    OverheadReport {
        /// Charge every architecture on this communication log instead of
        /// each evaluated baseline's own log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => match cli.preset {
            Preset::Desk => RunConfig::desk(),
            Preset::Full => RunConfig::full(),
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(b) = cli.baseline {
        cfg.baseline = b;
    }
    if let Some(e) = cli.episodes {
        cfg.eval_episodes = e;
    }
    if let Some(i) = cli.invocation {
        cfg.invocation = i;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::TrainFormation { pattern, iters } => {
            let sizes = match pattern {
                Some(p) => vec![*p],
                None => cfg.world.pattern_sizes(),
            };
            for size in sizes {
                let out = harness::train_formation(&cfg, size, *iters)?;
                let last = out.curve.last().map_or(f64::NAN, |r| r.mean_reward);
                println!(
                    "pattern {size}: {} iterations, final mean reward {last:.3} -> {}",
                    out.curve.len(),
                    cfg.path(&harness::teacher_file(size)).display()
                );
            }
        }
        Command::Distill => {
            let out = harness::distill_stage(&cfg)?;
            println!(
                "distill: loss {:.6} -> {:.6}",
                out.initial_loss,
                out.epoch_losses.last().copied().unwrap_or(out.initial_loss)
            );
        }
        Command::TrainDivision => {
            let out = harness::train_division_stage(&cfg)?;
            println!(
                "train-division: held-out accuracy {:.4} over {} pairs",
                out.heldout_accuracy, out.heldout_size
            );
        }
        Command::AltTrain => {
            let out = harness::alt_train_stage(&cfg)?;
            for (tag, o) in [("IA", &out.ia), ("AT", &out.at)] {
                if let Some(r) = o.curve.last() {
                    println!(
                        "alt-train {tag}: final mean R {:.3}, mean R_at {:.3}",
                        r.mean_reward, r.mean_at_reward
                    );
                }
            }
        }
        Command::Evaluate => {
            let s = harness::evaluate_stage(&cfg)?;
            println!("{}", harness::EvalSummary::csv_header());
            println!("{}", s.csv_row());
        }
        Command::OverheadReport { log } => {
            print!("{}", harness::overhead_report(&cfg, log.as_deref())?);
        }
        Command::ShowConfig => print!("{}", cfg.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
