mod common;

use rand::Rng;
use swarm_core::distill::*;
use swarm_core::env::WorldConfig;
use swarm_core::nn::{HeadKind, MlpSpec, Network};
use swarm_core::rewards::RewardParams;
use swarm_core::seed;

fn distill_loss_oracle(student: &Network, buf: &DistillBuffer, idx: &[usize]) -> f64 {
    idx.iter()
        .map(|&k| {
            let r = &buf.records[k];
            let m = student.forward(&r.observation).unwrap();
            let dm: f64 = m.iter().zip(&r.mean).map(|(a, b)| (a - b).powi(2)).sum();
            let ds: f64 = student.log_std().iter().zip(&r.log_std).map(|(a, b)| (a - b).powi(2)).sum();
            dm + ds
        })
        .sum::<f64>()
        / idx.len() as f64
}

#[test]
fn distill_loss_gradient_matches_finite_differences() {
    for s in 0..10 {
        let student = common::network(6, &[8, 8], 2, HeadKind::Gaussian, s);
        let mut rng = seed::rng(s, "distill-fd", 0);
        let mut buf = DistillBuffer::new(64);
        for k in 0..20 {
            buf.push(DistillRecord {
                observation: common::random_vec(&mut rng, 6, -3.0, 3.0),
                mean: common::random_vec(&mut rng, 2, -0.9, 0.9),
                log_std: vec![rng.random_range(-1.5..0.0), rng.random_range(-1.5..0.0)],
                pattern: k % 2,
            });
        }
        let idx: Vec<usize> = (0..buf.len()).collect();
        let (loss, g) = distill_loss_gradient(&student, &buf, &idx).unwrap();
        assert!(common::close(loss, distill_loss_oracle(&student, &buf, &idx), 1e-12));
        let fd = common::fd_gradient(&student.params, 1e-6, |p| {
            distill_loss_oracle(&Network { spec: student.spec.clone(), params: p.clone() }, &buf, &idx)
        });
        let err = common::relative_error(&g.0, &fd);
        assert!(err < 1e-4, "seed {s}: relative error {err}");
    }
}

fn teachers(world: &WorldConfig) -> (Network, Network) {
    let spec = MlpSpec::new(world.observation_width(), &[16], 2, HeadKind::Gaussian).with_input_scale(0.25);
    let a = Network::init(spec.clone(), &mut seed::rng(1, "teacher", 0), -0.7).unwrap();
    let b = Network::init(spec, &mut seed::rng(1, "teacher", 1), -1.2).unwrap();
    (a, b)
}

#[test]
fn buffer_is_balanced_and_reproducible() {
    let world = WorldConfig::desk();
    let (a, b) = teachers(&world);
    let params = RewardParams::default();
    let build = || build_buffer(&world, &params, &[(0, &a), (1, &b)], 2, 600, 7).unwrap();
    let buf = build();
    assert_eq!(buf.len(), 600);
    assert_eq!(buf.count_pattern(0), 300);
    assert_eq!(buf.to_text(&world), build().to_text(&world));
    assert!(buf.records.iter().all(|r| r.observation.len() == world.observation_width()));
}

#[test]
fn student_reproduces_both_teachers() {
    let world = WorldConfig::desk();
    let (a, b) = teachers(&world);
    let buf = build_buffer(&world, &RewardParams::default(), &[(0, &a), (1, &b)], 4, 4000, 3).unwrap();
    let spec = MlpSpec::new(world.observation_width(), &[32, 32], 2, HeadKind::Gaussian).with_input_scale(0.25);
    let cfg = DistillConfig { epochs: 40, batch_size: 64, ..DistillConfig::default() };
    let out = distill(&buf, spec, &cfg, 5).unwrap();
    // The shared log-std can only settle between the teachers' values
    // (-0.7 and -1.2), leaving a floor of 2·0.25² on every record.
    let floor = 2.0 * 0.25f64.powi(2);
    let last = *out.epoch_losses.last().unwrap();
    assert!(last < floor + 0.01, "initial {}, final {last}", out.initial_loss);
    for ls in out.student.log_std() {
        assert!((ls + 0.95).abs() < 0.02, "log-std {ls}");
    }
    for p in 0..2 {
        let l = pattern_loss(&out.student, &buf, p).unwrap();
        assert!(l < floor + 0.02, "pattern {p}: {l}");
    }
}
