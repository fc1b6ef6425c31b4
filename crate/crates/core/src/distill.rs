//! Merging per-pattern teacher policies into one student by regression on
//! the teachers' action-distribution parameters.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::comm::InvocationSchedule;
use crate::env::WorldConfig;
use crate::episode::{run_episode, ActionMode, DivisionMode, EpisodeSpec};
use crate::error::{Error, Result};
use crate::nn::{gradient, Adam, MlpSpec, Network, ParamVector, SampleLoss};
use crate::rewards::RewardParams;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct DistillRecord {
    /// Zero-padded low-level input.
    pub observation: Vec<f64>,
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
    /// Pattern index of the teacher that produced the record.
    pub pattern: usize,
}

/// Bounded replay memory; pushing past capacity evicts the oldest record.
#[derive(Debug, Clone, PartialEq)]
pub struct DistillBuffer {
    pub capacity: usize,
    pub records: VecDeque<DistillRecord>,
}

impl DistillBuffer {
    pub fn new(capacity: usize) -> Self {
        DistillBuffer {
            capacity,
            records: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, record: DistillRecord) {
        if self.capacity == 0 {
            return;
        }
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count_pattern(&self, pattern: usize) -> usize {
        self.records.iter().filter(|r| r.pattern == pattern).count()
    }

    /// Line records: pattern size, observation, teacher mean, teacher
    /// log-std, six fractional digits.
    pub fn to_text(&self, world: &WorldConfig) -> String {
        let mut out = format!(
            "# distill obs_width={} action_width=2 records={}\n",
            world.observation_width(),
            self.len()
        );
        for r in &self.records {
            write!(out, "{}", world.patterns[r.pattern].size).unwrap();
            for v in r.observation.iter().chain(&r.mean).chain(&r.log_std) {
                let v = if *v == 0.0 { 0.0 } else { *v };
                write!(out, " {v:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Rolls out each teacher in its own pattern and records the teacher's
/// distribution parameters for every visited input. Records from different
/// patterns are interleaved so eviction keeps the buffer balanced.
pub fn build_buffer(
    world: &WorldConfig,
    rewards: &RewardParams,
    teachers: &[(usize, &Network)],
    episodes_per_pattern: usize,
    capacity: usize,
    master_seed: u64,
) -> Result<DistillBuffer> {
    if teachers.is_empty() {
        return Err(Error::input("no teacher policies supplied"));
    }
    let mut per_pattern: Vec<Vec<DistillRecord>> = Vec::with_capacity(teachers.len());
    for &(pattern, teacher) in teachers {
        if pattern >= world.n_patterns() {
            return Err(Error::input(format!("teacher pattern index {pattern} out of range")));
        }
        let mut records = Vec::new();
        for e in 0..episodes_per_pattern {
            let ep = run_episode(&EpisodeSpec {
                world,
                rewards,
                division: DivisionMode::Fixed(pattern),
                policy: teacher,
                actions: ActionMode::Sample,
                schedule: InvocationSchedule::EveryStep,
                seed: seed::derive(master_seed, "distill-buffer", (pattern as u64) << 32 | e as u64),
            })?;
            for s in ep.steps {
                for input in s.policy_inputs {
                    let mean = teacher.forward(&input)?;
                    records.push(DistillRecord {
                        observation: input,
                        mean,
                        log_std: teacher.log_std().to_vec(),
                        pattern,
                    });
                }
            }
        }
        per_pattern.push(records);
    }
    let mut buffer = DistillBuffer::new(capacity);
    let longest = per_pattern.iter().map(Vec::len).max().unwrap_or(0);
    let mut iters: Vec<_> = per_pattern.into_iter().map(Vec::into_iter).collect();
    for _ in 0..longest {
        for it in iters.iter_mut() {
            if let Some(r) = it.next() {
                buffer.push(r);
            }
        }
    }
    Ok(buffer)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillConfig {
    pub capacity: usize,
    pub episodes_per_pattern: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    /// Factor applied to the student's inputs.
    pub input_scale: f64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        DistillConfig {
            capacity: 50_000,
            episodes_per_pattern: 20,
            epochs: 60,
            batch_size: 256,
            learning_rate: 1e-3,
            hidden: vec![64, 64],
            input_scale: 0.25,
        }
    }
}

fn record_loss(mean: &[f64], log_std: &[f64], r: &DistillRecord) -> SampleLoss {
    let mut loss = 0.0;
    let mut dm = Vec::with_capacity(mean.len());
    let mut ds = Vec::with_capacity(log_std.len());
    for (s, t) in mean.iter().zip(&r.mean) {
        loss += (s - t) * (s - t);
        dm.push(2.0 * (s - t));
    }
    for (s, t) in log_std.iter().zip(&r.log_std) {
        loss += (s - t) * (s - t);
        ds.push(2.0 * (s - t));
    }
    SampleLoss {
        loss,
        d_output: dm,
        d_log_std: ds,
    }
}

/// Mean squared distance between student and teacher distribution
/// parameters over the selected records.
pub fn distill_loss(student: &Network, buffer: &DistillBuffer, idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &k in idx {
        let r = &buffer.records[k];
        let mean = student.forward(&r.observation)?;
        total += record_loss(&mean, student.log_std(), r).loss;
    }
    Ok(total / idx.len() as f64)
}

pub fn distill_loss_gradient(student: &Network, buffer: &DistillBuffer, idx: &[usize]) -> Result<(f64, ParamVector)> {
    let scale = 1.0 / idx.len().max(1) as f64;
    gradient(
        &student.spec,
        &student.params,
        idx.iter().map(|&k| &buffer.records[k].observation),
        |j, mean, log_std| {
            let mut s = record_loss(mean, log_std, &buffer.records[idx[j]]);
            s.loss *= scale;
            s.d_output.iter_mut().for_each(|v| *v *= scale);
            s.d_log_std.iter_mut().for_each(|v| *v *= scale);
            s
        },
    )
}

/// Mean loss restricted to one pattern's records.
pub fn pattern_loss(student: &Network, buffer: &DistillBuffer, pattern: usize) -> Result<f64> {
    let idx: Vec<usize> = (0..buffer.len()).filter(|&k| buffer.records[k].pattern == pattern).collect();
    distill_loss(student, buffer, &idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistillOutcome {
    pub student: Network,
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
}

/// Student with the given architecture trained from a fresh
/// initialization.
pub fn distill(buffer: &DistillBuffer, spec: MlpSpec, config: &DistillConfig, seed_: u64) -> Result<DistillOutcome> {
    let mut rng = seed::rng(seed_, "student-init", 0);
    let student = Network::init(spec, &mut rng, 0.0)?;
    distill_from(buffer, student, config, seed_)
}

/// Trains `student` on the buffer with minibatches that alternate records
/// across patterns.
pub fn distill_from(
    buffer: &DistillBuffer,
    mut student: Network,
    config: &DistillConfig,
    seed_: u64,
) -> Result<DistillOutcome> {
    if buffer.is_empty() {
        return Err(Error::input("distillation buffer is empty"));
    }
    let mut rng = seed::rng(seed_, "distill", 0);
    let all: Vec<usize> = (0..buffer.len()).collect();
    let initial_loss = distill_loss(&student, buffer, &all)?;
    let mut patterns: Vec<usize> = buffer.records.iter().map(|r| r.pattern).collect();
    patterns.sort_unstable();
    patterns.dedup();
    let mut by_pattern: Vec<Vec<usize>> = patterns
        .iter()
        .map(|&p| (0..buffer.len()).filter(|&k| buffer.records[k].pattern == p).collect())
        .collect();
    let mut opt = Adam::new(student.params.len(), config.learning_rate);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order = Vec::with_capacity(buffer.len());
    for epoch in 0..config.epochs {
        for list in by_pattern.iter_mut() {
            list.shuffle(&mut rng);
        }
        order.clear();
        let longest = by_pattern.iter().map(Vec::len).max().unwrap_or(0);
        for k in 0..longest {
            for list in &by_pattern {
                if let Some(&i) = list.get(k) {
                    order.push(i);
                }
            }
        }
        let mut sum = 0.0;
        for chunk in order.chunks(config.batch_size.max(1)) {
            let (l, g) = distill_loss_gradient(&student, buffer, chunk).map_err(|e| Error::Training {
                stage: "distill",
                iteration: epoch,
                detail: e.to_string(),
            })?;
            sum += l * chunk.len() as f64;
            student.params = opt.step(&student.params, &g);
        }
        let mean = sum / order.len() as f64;
        if !mean.is_finite() || !student.params.is_finite() {
            return Err(Error::Training {
                stage: "distill",
                iteration: epoch,
                detail: format!("loss {mean}"),
            });
        }
        epoch_losses.push(mean);
    }
    Ok(DistillOutcome {
        student,
        initial_loss,
        epoch_losses,
    })
}
