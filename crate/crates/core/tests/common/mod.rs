//! Independent oracles and numeric helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use swarm_core::nn::{HeadKind, MlpSpec, Network, ParamVector};
use swarm_core::{seed, Vec2};

/// Exhaustive double loop over both directed distances.
pub fn hausdorff_oracle(p: &[Vec2], f: &[Vec2]) -> f64 {
    let mut best = 0.0f64;
    for a in p {
        let mut m = f64::INFINITY;
        for b in f {
            let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            if d < m {
                m = d;
            }
        }
        best = best.max(m);
    }
    for b in f {
        let mut m = f64::INFINITY;
        for a in p {
            let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            if d < m {
                m = d;
            }
        }
        best = best.max(m);
    }
    best
}

/// Advantages straight from the definition: a discounted sum of TD
/// residuals from `t` to the end, O(T²).
pub fn gae_oracle(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    (0..n)
        .map(|t| {
            (t..n)
                .map(|l| {
                    let delta = rewards[l] + gamma * values[l + 1] - values[l];
                    (gamma * lambda).powi((l - t) as i32) * delta
                })
                .sum()
        })
        .collect()
}

/// Central finite differences of `f` at `x`.
pub fn fd_gradient(x: &ParamVector, h: f64, mut f: impl FnMut(&ParamVector) -> f64) -> Vec<f64> {
    let mut p = x.clone();
    (0..x.len())
        .map(|k| {
            let orig = p.0[k];
            p.0[k] = orig + h;
            let up = f(&p);
            p.0[k] = orig - h;
            let down = f(&p);
            p.0[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error of two gradients, measured against the larger norm.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn network(input: usize, hidden: &[usize], output: usize, head: HeadKind, seed_: u64) -> Network {
    let spec = MlpSpec::new(input, hidden, output, head).with_input_scale(0.5);
    Network::init(spec, &mut seed::rng(seed_, "test-net", 0), -0.4).unwrap()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// Desk world with every stage shrunk to a few iterations.
pub fn tiny_config(out: &std::path::Path) -> swarm_core::harness::RunConfig {
    let mut cfg = swarm_core::harness::RunConfig::desk();
    cfg.out_dir = out.to_path_buf();
    cfg.seed = 17;
    cfg.eval_episodes = 3;
    cfg.formation_iterations = 2;
    cfg.il_episodes = 2;
    cfg.ppo.hidden = vec![8];
    cfg.ppo.episodes_per_iteration = 1;
    cfg.ppo.epochs = 2;
    cfg.distill.episodes_per_pattern = 1;
    cfg.distill.epochs = 2;
    cfg.distill.hidden = vec![8];
    cfg.il.hidden = vec![8];
    cfg.il.epochs = 2;
    cfg.at.iterations = 2;
    cfg.at.critic_warmup = 1;
    cfg
}

/// Runs every stage in order.
pub fn run_pipeline(cfg: &swarm_core::harness::RunConfig) -> swarm_core::Result<()> {
    use swarm_core::harness::*;
    for p in &cfg.world.patterns {
        train_formation(cfg, p.size, None)?;
    }
    distill_stage(cfg)?;
    train_division_stage(cfg)?;
    alt_train_stage(cfg)?;
    for tag in Baseline::ALL {
        evaluate_stage(&RunConfig { baseline: tag, ..cfg.clone() })?;
    }
    overhead_report(cfg, None)?;
    Ok(())
}

/// Every file under `dir` with its bytes, sorted by name.
pub fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}
