//! Stage functions behind the CLI. Each stage reads its inputs from and
//! writes its artifacts to `RunConfig::out_dir`; a missing input is
//! reported as the stage that produces it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::alt_training::{fine_tune, fine_tune_csv, FineTuneOutcome};
use crate::comm::{overhead_csv, Architecture, CommLog, OverheadRow};
use crate::distill::{build_buffer, distill, pattern_loss, DistillOutcome};
use crate::division::{il_collect, il_train, IlConfig, IlOutcome};
use crate::episode::DivisionMode;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, HeadKind, MlpSpec, Network};
use crate::ppo::{curve_csv, train_formation_policy, TrainOutcome};
use crate::seed;

use super::config::{Baseline, RunConfig};
use super::eval::{log_overhead, run_baseline, BaselineNets, EvalLogs, EvalSummary};

pub const STUDENT: &str = "student.ckpt";
pub const DIVISION: &str = "division.ckpt";
pub const STUDENT_IA: &str = "student-ia.ckpt";
pub const STUDENT_AT: &str = "student-at.ckpt";

pub fn teacher_file(size: usize) -> String {
    format!("teacher-c{size}.ckpt")
}

pub fn eval_file(tag: Baseline, ext: &str) -> String {
    format!("eval-{}.{ext}", tag.tag().to_ascii_lowercase())
}

fn write(cfg: &RunConfig, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.path(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn save(cfg: &RunConfig, name: &str, ckpt: &Checkpoint) -> Result<PathBuf> {
    write(cfg, name, &ckpt.to_text()?)
}

/// Loads a checkpoint produced by `stage`.
fn require(path: &Path, stage: &'static str) -> Result<Network> {
    if !path.exists() {
        return Err(Error::MissingStage {
            stage,
            path: path.display().to_string(),
        });
    }
    Checkpoint::load(path)?.network()
}

fn losses_csv(initial: f64, epochs: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    out.push_str(&format!("0,{initial:.8}\n"));
    for (k, l) in epochs.iter().enumerate() {
        out.push_str(&format!("{},{l:.8}\n", k + 1));
    }
    out
}

/// MAPPO on the pattern with `size` agents per group. Writes
/// `teacher-c<size>.ckpt` and `formation-c<size>.csv`.
pub fn train_formation(cfg: &RunConfig, size: usize, iterations: Option<usize>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let pattern = cfg.world.pattern_index(size).ok_or_else(|| {
        Error::input(format!(
            "no pattern with {size} agents; configured sizes are {:?}",
            cfg.world.pattern_sizes()
        ))
    })?;
    let out = train_formation_policy(
        &cfg.world,
        &cfg.rewards,
        pattern,
        iterations.unwrap_or(cfg.formation_iterations),
        &cfg.ppo,
        seed::derive(cfg.seed, "formation", pattern as u64),
    )?;
    save(
        cfg,
        &teacher_file(size),
        &Checkpoint::from_network(&format!("teacher-c{size}"), &out.learner.policy, Some(&out.learner.actor_opt)),
    )?;
    write(cfg, &format!("formation-c{size}.csv"), &curve_csv(&out.curve))?;
    Ok(out)
}

/// Merges every teacher into one student. Writes `student.ckpt`,
/// `distill-buffer.log` and `distill-loss.csv` (with the final per-pattern
/// losses as trailing comments).
pub fn distill_stage(cfg: &RunConfig) -> Result<DistillOutcome> {
    cfg.validate()?;
    let teachers: Vec<(usize, Network)> = cfg
        .world
        .patterns
        .iter()
        .enumerate()
        .map(|(c, p)| Ok((c, require(&cfg.path(&teacher_file(p.size)), "train-formation")?)))
        .collect::<Result<_>>()?;
    let refs: Vec<(usize, &Network)> = teachers.iter().map(|(c, n)| (*c, n)).collect();
    let buffer = build_buffer(
        &cfg.world,
        &cfg.rewards,
        &refs,
        cfg.distill.episodes_per_pattern,
        cfg.distill.capacity,
        seed::derive(cfg.seed, "distill-buffer", 0),
    )?;
    write(cfg, "distill-buffer.log", &buffer.to_text(&cfg.world))?;
    let spec = MlpSpec::new(cfg.world.observation_width(), &cfg.distill.hidden, 2, HeadKind::Gaussian)
        .with_input_scale(cfg.distill.input_scale);
    let out = distill(&buffer, spec, &cfg.distill, seed::derive(cfg.seed, "distill", 0))?;
    save(cfg, STUDENT, &Checkpoint::from_network("student", &out.student, None))?;
    let mut csv = losses_csv(out.initial_loss, &out.epoch_losses);
    for (c, p) in cfg.world.patterns.iter().enumerate() {
        csv.push_str(&format!("# pattern {} loss {:.8}\n", p.size, pattern_loss(&out.student, &buffer, c)?));
    }
    write(cfg, "distill-loss.csv", &csv)?;
    Ok(out)
}

/// Imitation learning of the division policy from central-rule labels
/// gathered with the distilled student. Writes `division.ckpt` and
/// `il-loss.csv` (held-out accuracy in a trailing comment).
pub fn train_division_stage(cfg: &RunConfig) -> Result<IlOutcome> {
    cfg.validate()?;
    let student = require(&cfg.path(STUDENT), "distill")?;
    let data = il_collect(
        &cfg.world,
        &cfg.rewards,
        &student,
        cfg.il_episodes,
        seed::derive(cfg.seed, "il-collect", 0),
    )?;
    let il = IlConfig {
        seed: seed::derive(cfg.seed, "il-train", cfg.il.seed),
        ..cfg.il.clone()
    };
    let out = il_train(&data, cfg.world.n_patterns(), &il)?;
    save(cfg, DIVISION, &Checkpoint::from_network("division", &out.network, None))?;
    let mut csv = losses_csv(out.initial_loss, &out.epoch_losses);
    csv.push_str(&format!(
        "# heldout_accuracy {:.6} over {} pairs\n",
        out.heldout_accuracy, out.heldout_size
    ));
    write(cfg, "il-loss.csv", &csv)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltTrainOutcome {
    /// Fine-tuned under the learned division policy.
    pub ia: FineTuneOutcome,
    /// Fine-tuned under the central rule.
    pub at: FineTuneOutcome,
}

/// Fine-tunes the student twice, once under the frozen learned division
/// policy and once under the central rule. Writes `student-ia.ckpt`,
/// `student-at.ckpt`, `alt-train-ia.csv` and `alt-train-at.csv`.
pub fn alt_train_stage(cfg: &RunConfig) -> Result<AltTrainOutcome> {
    cfg.validate()?;
    let pi_f = require(&cfg.path(DIVISION), "train-division")?;
    let student = require(&cfg.path(STUDENT), "distill")?;
    let ia = fine_tune(
        &cfg.world,
        &cfg.rewards,
        &student,
        DivisionMode::Decentralized(&pi_f),
        &cfg.at,
        &cfg.ppo,
        seed::derive(cfg.seed, "alt-train", 0),
    )?;
    let at = fine_tune(
        &cfg.world,
        &cfg.rewards,
        &student,
        DivisionMode::Central,
        &cfg.at,
        &cfg.ppo,
        seed::derive(cfg.seed, "alt-train", 1),
    )?;
    for (name, csv, out) in [(STUDENT_IA, "alt-train-ia.csv", &ia), (STUDENT_AT, "alt-train-at.csv", &at)] {
        save(
            cfg,
            name,
            &Checkpoint::from_network("student", &out.learner.policy, Some(&out.learner.actor_opt)),
        )?;
        write(cfg, csv, &fine_tune_csv(&out.curve))?;
    }
    Ok(AltTrainOutcome { ia, at })
}

/// Evaluates one baseline with the checkpoints it needs, without writing
/// anything.
pub fn evaluate_baseline(cfg: &RunConfig, tag: Baseline) -> Result<(EvalSummary, EvalLogs)> {
    cfg.validate()?;
    let base = require(&cfg.path(STUDENT), "distill")?;
    let student = match tag {
        Baseline::At => require(&cfg.path(STUDENT_AT), "alt-train")?,
        Baseline::Ia => require(&cfg.path(STUDENT_IA), "alt-train")?,
        _ => base,
    };
    let division = match tag {
        Baseline::Il | Baseline::Ia => Some(require(&cfg.path(DIVISION), "train-division")?),
        _ => None,
    };
    run_baseline(
        tag,
        cfg,
        BaselineNets {
            student: &student,
            division: division.as_ref(),
        },
    )
}

/// Evaluates `cfg.baseline` and writes `eval-<tag>.csv` plus the
/// trajectory (`.traj`), division-event (`.division`) and communication
/// (`.comm`) logs.
pub fn evaluate_stage(cfg: &RunConfig) -> Result<EvalSummary> {
    let tag = cfg.baseline;
    let (summary, logs) = evaluate_baseline(cfg, tag)?;
    write(
        cfg,
        &eval_file(tag, "csv"),
        &format!("{}\n{}\n", EvalSummary::csv_header(), summary.csv_row()),
    )?;
    write(cfg, &eval_file(tag, "traj"), &logs.trajectory)?;
    write(cfg, &eval_file(tag, "division"), &logs.division)?;
    write(cfg, &eval_file(tag, "comm"), &logs.comm)?;
    Ok(summary)
}

/// Overhead table. With `log`, every architecture is charged on that one
/// communication log. Without it, each evaluated baseline is charged on its
/// own log. Writes `overhead.csv` and returns its text.
pub fn overhead_report(cfg: &RunConfig, log: Option<&Path>) -> Result<String> {
    cfg.validate()?;
    let mut rows = Vec::new();
    match log {
        Some(path) => {
            let comm = CommLog::parse(&fs::read_to_string(path)?)?;
            for (method, arch) in [
                ("centralized", Architecture::Centralized),
                ("leader-follower", Architecture::LeaderFollower),
                ("decentralized", Architecture::Decentralized),
            ] {
                let (ledger, episodes) = log_overhead(&comm, &cfg.budget, cfg.invocation, arch)?;
                rows.push(OverheadRow {
                    method: method.into(),
                    ledger,
                    episodes,
                });
            }
        }
        None => {
            for tag in Baseline::ALL {
                let path = cfg.path(&eval_file(tag, "comm"));
                if !path.exists() {
                    continue;
                }
                let comm = CommLog::parse(&fs::read_to_string(&path)?)?;
                let (ledger, episodes) = log_overhead(&comm, &cfg.budget, cfg.invocation, tag.architecture())?;
                rows.push(OverheadRow {
                    method: tag.tag().into(),
                    ledger,
                    episodes,
                });
            }
            if rows.is_empty() {
                return Err(Error::MissingStage {
                    stage: "evaluate",
                    path: cfg.path("eval-<baseline>.comm").display().to_string(),
                });
            }
        }
    }
    let csv = overhead_csv(&rows);
    write(cfg, "overhead.csv", &csv)?;
    Ok(csv)
}
