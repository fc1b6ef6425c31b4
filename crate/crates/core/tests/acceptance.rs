//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use swarm_core::comm::*;
use swarm_core::division::*;
use swarm_core::env::*;
use swarm_core::episode::{run_episode, ActionMode, DivisionMode, EpisodeSpec};
use swarm_core::harness::*;
use swarm_core::nn::{HeadKind, Network};
use swarm_core::ppo::{gae, policy_loss_gradient, value_loss_gradient, RolloutBuffer, Transition};
use swarm_core::rewards::*;
use swarm_core::{distill, seed, Vec2};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn hausdorff_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(1, "acceptance-hausdorff", 0);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let set = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec2> {
            let n = rng.random_range(1..=8);
            (0..n).map(|_| Vec2::new(rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0))).collect()
        };
        let p = set(&mut rng);
        let f = set(&mut rng);
        let d = hausdorff_distance(&p, &f).map_err(|e| e.to_string())?;
        let o = common::hausdorff_oracle(&p, &f);
        worst = worst.max((d - o).abs() / o.max(f64::MIN_POSITIVE));
        ensure(d == hausdorff_distance(&f, &p).unwrap(), "asymmetric distance")?;
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, format!("relative error {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("500 pairs, max relative error {worst:e}, {elapsed:?}"))
}

fn reward_examples() -> Outcome {
    let params = RewardParams::default();
    let pair = FormationPattern { size: 2, offsets: vec![Vec2::ZERO, Vec2::ZERO], speed_cap: 1.0, safety_min: 0.0, safety_max: None };
    let checks = [
        // d_HD = 1.75 against a collapsed pair.
        (formation_reward(&[Vec2::new(-1.75, 0.0), Vec2::new(1.75, 0.0)], &pair, &params).unwrap(), -1.0),
        (formation_reward(&[Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0)], &pair, &params).unwrap(), 0.0),
        (formation_reward(&[Vec2::new(-0.75, 0.0), Vec2::new(0.75, 0.0)], &pair, &params).unwrap(), 0.0),
        (area_reward(&[Vec2::new(0.0, 9.0)], &params), -0.3 * 4.5f64.exp()),
        (area_reward(&[Vec2::new(8.0, 0.0)], &params), 0.0),
        (evasion_reward(&[Vec2::new(0.2, 0.0), Vec2::new(3.0, 0.0)], Vec2::ZERO, &params), -20.0),
        (evasion_reward(&[Vec2::new(0.2, 0.0), Vec2::new(0.0, 0.1), Vec2::new(-0.3, 0.0)], Vec2::ZERO, &params), -60.0),
        (evasion_reward(&[Vec2::new(3.0, 0.0)], Vec2::ZERO, &params), 0.0),
    ];
    for (k, (got, want)) in checks.iter().enumerate() {
        ensure((got - want).abs() <= 1e-9, format!("example {k}: {got} != {want}"))?;
    }
    Ok(format!("{} examples within 1e-9", checks.len()))
}

fn gae_equivalence() -> Outcome {
    let mut rng = seed::rng(3, "acceptance-gae", 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.random_range(1..=64);
        let r = common::random_vec(&mut rng, t, -10.0, 10.0);
        let v = common::random_vec(&mut rng, t + 1, -10.0, 10.0);
        let (g, l) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let fast = gae(&r, &v, g, l).map_err(|e| e.to_string())?;
        let slow = common::gae_oracle(&r, &v, g, l);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    ensure(worst <= 1e-10, format!("error {worst:e}"))?;
    Ok(format!("100 instances, max error {worst:e}"))
}

fn with_params(net: &Network, p: &swarm_core::nn::ParamVector) -> Network {
    Network { spec: net.spec.clone(), params: p.clone() }
}

fn gradient_checks() -> Outcome {
    let mut worst = [0.0f64; 4];
    for s in 0..10u64 {
        let mut rng = seed::rng(s, "acceptance-grad", 0);
        let policy = common::network(6, &[8, 8], 2, HeadKind::Gaussian, s);
        let value = common::network(5, &[8, 8], 1, HeadKind::Value, 50 + s);
        let simplex = common::network(6, &[8, 8], 2, HeadKind::Simplex, 90 + s);
        let mut buf = RolloutBuffer { n_agents: 1, ..RolloutBuffer::default() };
        for _ in 0..16 {
            let observation = common::random_vec(&mut rng, 6, -3.0, 3.0);
            let action = common::random_vec(&mut rng, 2, -1.5, 1.5);
            let lp = policy.log_prob(&observation, &action).unwrap() + rng.random_range(-0.3..0.3);
            buf.transitions.push(Transition {
                observation,
                action,
                log_prob: lp,
                state: common::random_vec(&mut rng, 5, -3.0, 3.0),
                reward: 0.0,
                value: rng.random_range(-2.0..2.0),
                done: false,
            });
            buf.advantages.push(rng.random_range(-2.0..2.0));
        }
        let idx: Vec<usize> = (0..buf.len()).collect();
        let adv = buf.advantages.clone();

        let (_, g, _) = policy_loss_gradient(&policy, &buf, &idx, &adv, 0.2).unwrap();
        let fd = common::fd_gradient(&policy.params, 1e-6, |p| {
            let net = with_params(&policy, p);
            -idx.iter()
                .map(|&k| {
                    let t = &buf.transitions[k];
                    let r = (net.log_prob(&t.observation, &t.action).unwrap() - t.log_prob).exp();
                    (r * adv[k]).min(r.clamp(0.8, 1.2) * adv[k])
                })
                .sum::<f64>()
                / idx.len() as f64
        });
        worst[0] = worst[0].max(common::relative_error(&g.0, &fd));

        let (_, g) = value_loss_gradient(&value, &buf, &idx).unwrap();
        let fd = common::fd_gradient(&value.params, 1e-6, |p| {
            let net = with_params(&value, p);
            idx.iter()
                .map(|&k| {
                    let t = &buf.transitions[k];
                    (net.forward(&t.state).unwrap()[0] - (buf.advantages[k] + t.value)).powi(2)
                })
                .sum::<f64>()
                / idx.len() as f64
        });
        worst[1] = worst[1].max(common::relative_error(&g.0, &fd));

        let mut db = distill::DistillBuffer::new(64);
        for k in 0..16 {
            db.push(distill::DistillRecord {
                observation: common::random_vec(&mut rng, 6, -3.0, 3.0),
                mean: common::random_vec(&mut rng, 2, -0.9, 0.9),
                log_std: common::random_vec(&mut rng, 2, -1.5, 0.0),
                pattern: k % 2,
            });
        }
        let (_, g) = distill::distill_loss_gradient(&policy, &db, &idx).unwrap();
        let fd = common::fd_gradient(&policy.params, 1e-6, |p| {
            let net = with_params(&policy, p);
            idx.iter()
                .map(|&k| {
                    let r = &db.records[k];
                    let m = net.forward(&r.observation).unwrap();
                    m.iter().zip(&r.mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                        + net.log_std().iter().zip(&r.log_std).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum::<f64>()
                / idx.len() as f64
        });
        worst[2] = worst[2].max(common::relative_error(&g.0, &fd));

        let mut data = ImitationDataset::default();
        for _ in 0..16 {
            data.push(common::random_vec(&mut rng, 6, -3.0, 3.0), ConfidenceVector::label(rng.random_range(0..2), 2));
        }
        let (_, g) = il_loss_gradient(&simplex, &data, &idx).unwrap();
        let fd = common::fd_gradient(&simplex.params, 1e-6, |p| {
            let net = with_params(&simplex, p);
            idx.iter()
                .map(|&k| {
                    let y = net.forward(&data.inputs[k]).unwrap();
                    y.iter().zip(&data.labels[k].0).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .sum::<f64>()
                / idx.len() as f64
        });
        worst[3] = worst[3].max(common::relative_error(&g.0, &fd));
    }
    let names = ["policy", "value", "distill", "imitation"];
    for (n, w) in names.iter().zip(&worst) {
        ensure(*w <= 1e-4, format!("{n} loss relative error {w:e}"))?;
    }
    Ok(format!(
        "10 seeds; max relative errors policy {:.1e}, value {:.1e}, distill {:.1e}, imitation {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn resting_swarm(n: usize, adversary: Vec2) -> GlobalState {
    GlobalState {
        agents: vec![AgentState::default(); n],
        adversary: AdversaryState { position: adversary, velocity: Vec2::ZERO },
        step: 0,
    }
}

fn division_sweep() -> Outcome {
    let world = WorldConfig::full();
    let iv = SafetyIntervals::from_patterns(&world.patterns).map_err(|e| e.to_string())?;
    let united = Grouping::uniform(0, &TeammateMatrix::new(&world));
    for k in 0..=60 {
        let beta = k as f64 / 10.0;
        let s = resting_swarm(8, Vec2::new(beta, 0.0));
        let want = if beta >= 2.8 { 0 } else { 1 };
        let labels = central_division(&world, &s, &united, &iv);
        for z in &labels {
            ensure(z.is_label() && z.argmax() == want, format!("beta {beta}: got {:?}", z.0))?;
        }
    }
    ensure(world.patterns[iv.select(2.8)].size == 8, "boundary 2.8 must select the octagon")?;
    Ok("61 distances, boundary 2.8 -> 8 agents".into())
}

fn overhead_model() -> Outcome {
    let b = LinkBudget { agent_position_bits: 64, adversary_position_bits: 64, instruction_bits: 1, sequence_bits: 3 };
    ensure(centralized_step_cost(8, &b).total() == 584, "centralized step cost")?;
    ensure(leader_follower_step_cost(8, &b).total() == 455, "leader-follower step cost")?;
    ensure(decentralized_step_cost(&[7; 8], &b).total() == 224, "decentralized step cost")?;
    let world = WorldConfig::full();
    let rewards = RewardParams::default();
    let policy = Network::init(
        swarm_core::nn::MlpSpec::new(world.observation_width(), &[16], 2, HeadKind::Gaussian).with_input_scale(0.25),
        &mut seed::rng(6, "acceptance-overhead", 0),
        -0.5,
    )
    .unwrap();
    let mut worst_ratio = 0.0f64;
    let episodes = 20;
    for e in 0..episodes {
        let mode = if e % 2 == 0 { DivisionMode::Central } else { DivisionMode::Random };
        let ep = run_episode(&EpisodeSpec {
            world: &world,
            rewards: &rewards,
            division: mode,
            policy: &policy,
            actions: ActionMode::Sample,
            schedule: InvocationSchedule::EveryStep,
            seed: seed::derive(6, "acceptance-overhead", e),
        })
        .map_err(|e| e.to_string())?;
        let log = ep.comm_log(world.n_agents);
        let mut totals = Vec::new();
        for arch in [Architecture::Centralized, Architecture::LeaderFollower, Architecture::Decentralized] {
            let ledger = episode_report(&log, &b, InvocationSchedule::EveryStep, arch).map_err(|e| e.to_string())?;
            let sum: u64 = log.steps.iter().map(|s| arch.step_cost(&s.degrees, &b).total()).sum();
            ensure(ledger.total() == sum, format!("{arch}: ledger {} != step sum {sum}", ledger.total()))?;
            totals.push(ledger.total());
        }
        ensure(totals[2] < totals[1] && totals[1] < totals[0], format!("episode {e}: ordering {totals:?}"))?;
        let ratio = totals[2] as f64 / totals[0] as f64;
        worst_ratio = worst_ratio.max(ratio);
    }
    ensure(worst_ratio <= 0.384, format!("decentralized/centralized ratio {worst_ratio:.4}"))?;
    Ok(format!("584/455/224 bits; {episodes} episodes ordered, max ratio {worst_ratio:.4}"))
}

/// A connected swarm around a random centre with the adversary at a random
/// distance in [0, 6).
fn sample_united_state<R: Rng>(world: &WorldConfig, rng: &mut R) -> GlobalState {
    let centre = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    let turn: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = turn.sin_cos();
    let agents = world.patterns[0]
        .offsets
        .iter()
        .map(|o| {
            let r = Vec2::new(c * o.x - s * o.y, s * o.x + c * o.y) * 0.8;
            AgentState {
                position: centre + r + Vec2::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)),
                velocity: Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
            }
        })
        .collect::<Vec<_>>();
    let mean = agents.iter().fold(Vec2::ZERO, |a, s| a + s.position) * (1.0 / agents.len() as f64);
    let beta: f64 = rng.random_range(0.0..6.0);
    let bearing: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    GlobalState {
        agents,
        adversary: AdversaryState { position: mean + Vec2::new(beta * bearing.cos(), beta * bearing.sin()), velocity: Vec2::ZERO },
        step: 0,
    }
}

fn il_fidelity() -> Outcome {
    let world = WorldConfig::full();
    let tm = TeammateMatrix::new(&world);
    let iv = SafetyIntervals::from_patterns(&world.patterns).map_err(|e| e.to_string())?;
    let united = Grouping::uniform(0, &tm);
    let mut rng = seed::rng(7, "acceptance-il", 0);
    let mut data = ImitationDataset::default();
    while data.len() < 10_000 {
        let s = sample_united_state(&world, &mut rng);
        let labels = central_division(&world, &s, &united, &iv);
        for (i, z) in labels.into_iter().enumerate() {
            data.push(observe(&world, &s, i).features, z);
        }
    }
    let cfg = IlConfig { epochs: 150, ..IlConfig::default() };
    let out = il_train(&data, world.n_patterns(), &cfg).map_err(|e| e.to_string())?;
    ensure(out.heldout_accuracy >= 0.95, format!("held-out accuracy {:.4}", out.heldout_accuracy))?;

    // Perfect confidences, every agent hearing every other.
    let sizes = world.pattern_sizes();
    let everyone: Vec<Vec<usize>> = (0..8).map(|i| (0..8).filter(|&j| j != i).collect()).collect();
    for k in 0..1000 {
        let s = sample_united_state(&world, &mut rng);
        let labels = central_division(&world, &s, &united, &iv);
        let (enhanced, _) = exchange_confidence(&labels, &everyone);
        for (i, e) in enhanced.iter().enumerate() {
            let c = determine_pattern(&aggregate_importance(e), &sizes);
            ensure(c == labels[i].argmax(), format!("state {k}, agent {i}: {c} vs {}", labels[i].argmax()))?;
        }
    }
    Ok(format!(
        "held-out accuracy {:.4} on {} pairs; 1000 states matched exactly",
        out.heldout_accuracy, out.heldout_size
    ))
}

fn desk_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::desk();
    cfg.out_dir = dir.path().to_path_buf();
    let start = Instant::now();
    common::run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let summary = |tag: Baseline| -> Result<Vec<String>, String> {
        let text = std::fs::read_to_string(cfg.path(&eval_file(tag, "csv"))).map_err(|e| e.to_string())?;
        Ok(text.lines().nth(1).unwrap_or_default().split(',').map(str::to_owned).collect())
    };
    let field = |row: &[String], k: usize| row[k].parse::<f64>().unwrap_or(f64::NAN);
    let (ran, il, ia) = (summary(Baseline::Ran)?, summary(Baseline::Il)?, summary(Baseline::Ia)?);
    let (r_ran, r_ia) = (field(&ran, 2), field(&ia, 2));
    let (at_il, at_ia) = (field(&il, 5), field(&ia, 5));
    let detail = format!(
        "{:.0?}; mean reward IA {r_ia:.2} vs RAN {r_ran:.3e}; mean R_at IA {at_ia:.3} vs IL {at_il:.3}",
        elapsed
    );
    ensure(elapsed < Duration::from_secs(30 * 60), format!("too slow: {detail}"))?;
    ensure(r_ia > r_ran, format!("IA does not beat RAN: {detail}"))?;
    ensure(at_ia >= at_il, format!("IA inter-group reward below IL: {detail}"))?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::run_pipeline(&common::tiny_config(a.path())).map_err(|e| e.to_string())?;
    common::run_pipeline(&common::tiny_config(b.path())).map_err(|e| e.to_string())?;
    let (sa, sb) = (common::snapshot(a.path()), common::snapshot(b.path()));
    ensure(sa.len() == sb.len(), "different file sets")?;
    for ((na, ba), (nb, bb)) in sa.iter().zip(&sb) {
        ensure(na == nb && ba == bb, format!("{na} differs"))?;
    }
    Ok(format!("{} artifacts byte-identical across two runs", sa.len()))
}

fn guarded(f: fn() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
    })
}

fn main() -> ExitCode {
    // The end-to-end run dominates; start it first.
    let desk = std::thread::spawn(|| guarded(desk_pipeline));
    let quick: [Criterion; 8] = [
        (1, "Hausdorff oracle", hausdorff_oracle),
        (2, "reward formulas", reward_examples),
        (3, "GAE equivalence", gae_equivalence),
        (4, "gradient checks", gradient_checks),
        (5, "division rule", division_sweep),
        (6, "overhead model", overhead_model),
        (7, "imitation fidelity", il_fidelity),
        (9, "determinism", determinism),
    ];
    let mut results: Vec<(u32, &str, Outcome)> = quick.iter().map(|&(n, name, f)| (n, name, guarded(f))).collect();
    results.push((8, "desk end-to-end", desk.join().unwrap_or_else(|_| Err("panicked".into()))));
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(d) => println!("criterion {n} ({name}): PASS - {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
