use std::collections::HashMap;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use crate::env::{derived_rng, sample_train_seed, Environment, MAX_DEPTH, TEST_SEEDS};
use crate::eval::success_rate;
use crate::nn::optim::clip_grad_norm;
use crate::nn::scorer::ValuePolicy;
use crate::nn::{Adam, Checkpoint, ContrastiveExample, Optimizer, OptimizerKind, Params, Scorer, Sgd};
use crate::search::{beam_search, Policy};

use super::{
    extract_examples, value_targets, CountingEnv, LearnError, LearnerKind, MetricsRecord,
    ReplayBuffer, TrainConfig,
};

const STREAM_PROBLEMS: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_ROLLOUTS: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub episodes: u64,
    pub solved: u64,
    pub env_steps: u64,
    pub updates: u64,
    pub solved_since_update: u64,
    pub examples: u64,
    pub next_eval: u64,
    /// `env_steps` at the last metrics record.
    pub last_record: Option<u64>,
    /// Behavioural cloning has finished its training phase.
    pub bc_trained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Replay {
    Contrastive(ReplayBuffer<ContrastiveExample>),
    Value(ReplayBuffer<(String, f64)>),
}

enum Opt {
    Adam(Adam<f32>),
    Sgd(Sgd),
}

impl Opt {
    fn step(&mut self, params: &mut Params<f32>, grads: &Params<f32>) {
        match self {
            Opt::Adam(a) => a.step(params, grads),
            Opt::Sgd(s) => s.step(params, grads),
        }
    }
}

/// Resumable training state: scorer, optimizer, replay memory and counters.
pub struct Trainer {
    pub config: TrainConfig,
    pub scorer: Scorer<f32>,
    pub counters: Counters,
    opt: Opt,
    replay: Replay,
    loss_sum: f64,
    loss_count: u64,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self, LearnError> {
        config.validate()?;
        let scorer = Scorer::new(config.scorer.clone());
        let opt = match config.optimizer {
            OptimizerKind::Adam => Opt::Adam(Adam::new(&scorer.config, config.learning_rate)),
            OptimizerKind::Sgd => Opt::Sgd(Sgd {
                lr: config.learning_rate,
            }),
        };
        let replay = match config.learner {
            LearnerKind::Cvi => Replay::Value(ReplayBuffer::new(config.buffer_capacity)),
            _ => Replay::Contrastive(ReplayBuffer::new(config.buffer_capacity)),
        };
        let counters = Counters {
            next_eval: config.eval_interval,
            ..Default::default()
        };
        Ok(Trainer {
            config,
            scorer,
            counters,
            opt,
            replay,
            loss_sum: 0.0,
            loss_count: 0,
        })
    }

    pub fn buffer_len(&self) -> usize {
        match &self.replay {
            Replay::Contrastive(b) => b.len(),
            Replay::Value(b) => b.len(),
        }
    }

    pub fn contrastive_examples(&self) -> Vec<&ContrastiveExample> {
        match &self.replay {
            Replay::Contrastive(b) => b.iter().collect(),
            Replay::Value(_) => Vec::new(),
        }
    }

    pub fn value_examples(&self) -> Vec<&(String, f64)> {
        match &self.replay {
            Replay::Value(b) => b.iter().collect(),
            Replay::Contrastive(_) => Vec::new(),
        }
    }

    /// The policy used for search and greedy evaluation.
    pub fn policy(&self) -> Box<dyn Policy + '_> {
        match self.config.learner {
            LearnerKind::Cvi => Box::new(ValuePolicy(&self.scorer)),
            _ => Box::new(&self.scorer),
        }
    }

    pub fn depth(&self) -> usize {
        self.config.deepening.depth(self.counters.solved)
    }

    fn finished(&self) -> bool {
        self.counters.env_steps >= self.config.env_steps
            || self
                .config
                .max_episodes
                .is_some_and(|m| self.counters.episodes >= m)
    }

    /// Trains until the step or episode budget runs out, calling `on_record`
    /// after every evaluation. Calling it again on a finished trainer only
    /// emits the final record if it is missing.
    pub fn run(
        &mut self,
        env: &dyn Environment,
        mut on_record: impl FnMut(&MetricsRecord, &Trainer) -> Result<(), LearnError>,
    ) -> Result<(), LearnError> {
        if self.config.learner == LearnerKind::Bc {
            return self.run_bc(env, on_record);
        }
        while !self.finished() {
            self.search_episode(env)?;
            if self.counters.env_steps >= self.counters.next_eval {
                while self.counters.next_eval <= self.counters.env_steps {
                    self.counters.next_eval += self.config.eval_interval;
                }
                let rec = self.record(env);
                on_record(&rec, self)?;
            }
        }
        if self.counters.last_record != Some(self.counters.env_steps) {
            let rec = self.record(env);
            on_record(&rec, self)?;
        }
        Ok(())
    }

    /// One beam-search episode. Returns whether the problem was solved.
    pub fn search_episode(&mut self, env: &dyn Environment) -> Result<bool, LearnError> {
        let mut rng = derived_rng(self.config.seed, STREAM_PROBLEMS, self.counters.episodes);
        let start = env.generate(sample_train_seed(&mut rng));
        let depth = self.depth();
        let counted = CountingEnv::new(env);
        let outcome = {
            let policy = self.policy();
            beam_search(&counted, &*policy, &start, self.config.beam_size, depth)
        };
        self.counters.env_steps += counted.calls();
        self.counters.episodes += 1;
        if !outcome.solved() {
            return Ok(false);
        }
        self.counters.solved += 1;
        match &mut self.replay {
            Replay::Contrastive(buf) => {
                let examples =
                    extract_examples(&outcome, self.config.learner.negative_mode(), self.config.negative_cap)?;
                for e in &examples {
                    debug_assert!(
                        env.expand(&e.anchor)
                            .is_ok_and(|edges| edges.iter().any(|x| x.next_state == e.positive)),
                        "positive is not a successor of its anchor"
                    );
                }
                self.counters.examples += examples.len() as u64;
                buf.extend(examples);
            }
            Replay::Value(buf) => {
                let targets = value_targets(&outcome)?;
                self.counters.examples += targets.len() as u64;
                buf.extend(targets);
            }
        }
        self.counters.solved_since_update += 1;
        if self.counters.solved_since_update >= self.config.update_interval {
            self.counters.solved_since_update = 0;
            self.update()?;
        }
        Ok(true)
    }

    /// `steps_per_update` optimizer steps on minibatches drawn from replay.
    pub fn update(&mut self) -> Result<(), LearnError> {
        let mut rng = derived_rng(self.config.seed, STREAM_BATCHES, self.counters.updates);
        self.counters.updates += 1;
        for _ in 0..self.config.steps_per_update {
            let (loss, mut grads) = match &self.replay {
                Replay::Contrastive(b) if !b.is_empty() => {
                    self.scorer.infonce_loss_grad(&b.sample(&mut rng, self.config.minibatch))?
                }
                Replay::Value(b) if !b.is_empty() => {
                    self.scorer.value_loss_grad(&b.sample(&mut rng, self.config.minibatch))?
                }
                _ => return Ok(()),
            };
            if let Some(max) = self.config.grad_clip {
                clip_grad_norm(&mut grads, max);
            }
            self.opt.step(&mut self.scorer.params, &grads);
            self.loss_sum += loss;
            self.loss_count += 1;
        }
        Ok(())
    }

    /// Greedy success rate on the held-out seeds.
    pub fn evaluate(&self, env: &dyn Environment) -> f64 {
        let end = TEST_SEEDS.start + self.config.eval_problems.min(TEST_SEEDS.end - TEST_SEEDS.start);
        success_rate(env, &*self.policy(), TEST_SEEDS.start..end)
    }

    fn record(&mut self, env: &dyn Environment) -> MetricsRecord {
        let loss = (self.loss_count > 0).then(|| self.loss_sum / self.loss_count as f64);
        self.loss_sum = 0.0;
        self.loss_count = 0;
        self.counters.last_record = Some(self.counters.env_steps);
        MetricsRecord {
            step: self.counters.env_steps,
            episodes: self.counters.episodes,
            solved: self.counters.solved,
            success_rate: self.evaluate(env),
            loss,
            depth: self.depth(),
            examples: self.counters.examples,
        }
    }

    fn run_bc(
        &mut self,
        env: &dyn Environment,
        mut on_record: impl FnMut(&MetricsRecord, &Trainer) -> Result<(), LearnError>,
    ) -> Result<(), LearnError> {
        if !self.counters.bc_trained {
            while !self.finished() {
                self.rollout_episode(env)?;
            }
            if self.buffer_len() == 0 {
                log::warn!("no random rollout succeeded; the policy stays untrained");
            } else {
                let updates = self.counters.solved.div_ceil(self.config.update_interval);
                for _ in 0..updates {
                    self.update()?;
                }
            }
            self.counters.bc_trained = true;
        }
        if self.counters.last_record != Some(self.counters.env_steps) {
            let rec = self.record(env);
            on_record(&rec, self)?;
        }
        Ok(())
    }

    /// One uniform-random rollout. On success, every step of the loop-erased
    /// trajectory becomes an example contrasting the taken successor with
    /// its siblings.
    pub fn rollout_episode(&mut self, env: &dyn Environment) -> Result<bool, LearnError> {
        let mut rng = derived_rng(self.config.seed, STREAM_PROBLEMS, self.counters.episodes);
        let start = env.generate(sample_train_seed(&mut rng));
        let mut walk_rng = derived_rng(self.config.seed, STREAM_ROLLOUTS, self.counters.episodes);
        self.counters.episodes += 1;
        let mut children: HashMap<String, Vec<String>> = HashMap::new();
        let mut path = vec![start];
        let mut solved = false;
        for depth in 0..=MAX_DEPTH {
            let state = path.last().expect("non-empty").clone();
            if env.is_solved(&state)? {
                solved = true;
                break;
            }
            if depth == MAX_DEPTH || self.counters.env_steps >= self.config.env_steps {
                break;
            }
            let edges = env.expand(&state)?;
            self.counters.env_steps += 1;
            let Some(e) = edges.choose(&mut walk_rng) else { break };
            let next = e.next_state.clone();
            children
                .entry(state)
                .or_insert_with(|| edges.into_iter().map(|e| e.next_state).collect());
            path.push(next);
        }
        if !solved {
            return Ok(false);
        }
        self.counters.solved += 1;
        let mut erased: Vec<String> = Vec::new();
        for s in path {
            if let Some(j) = erased.iter().position(|x| *x == s) {
                erased.truncate(j);
            }
            erased.push(s);
        }
        let examples: Vec<ContrastiveExample> = erased
            .windows(2)
            .map(|w| {
                let mut negatives: Vec<String> = Vec::new();
                for c in &children[&w[0]] {
                    if *c != w[1] && !negatives.contains(c) && negatives.len() < self.config.negative_cap {
                        negatives.push(c.clone());
                    }
                }
                ContrastiveExample {
                    anchor: w[0].clone(),
                    positive: w[1].clone(),
                    negatives,
                }
            })
            .collect();
        self.counters.examples += examples.len() as u64;
        if let Replay::Contrastive(buf) = &mut self.replay {
            buf.extend(examples);
        }
        Ok(true)
    }

    /// Parameters, optimizer moments, replay memory and counters.
    pub fn to_checkpoint(&self) -> Checkpoint {
        let adam = match &self.opt {
            Opt::Adam(a) => Some(a),
            Opt::Sgd(_) => None,
        };
        let mut ckpt = Checkpoint::from_scorer(&self.scorer, adam);
        ckpt.metadata["train"] = serde_json::json!({
            "config": self.config,
            "counters": self.counters,
            "replay": self.replay,
        });
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self, LearnError> {
        let bad = |what: &str, e: serde_json::Error| {
            LearnError::Nn(crate::nn::NnError::Checkpoint(format!("bad {what}: {e}")))
        };
        let train = &ckpt.metadata["train"];
        let config: TrainConfig =
            serde_json::from_value(train["config"].clone()).map_err(|e| bad("train config", e))?;
        let mut t = Trainer::new(config)?;
        t.scorer = ckpt.to_scorer()?;
        t.counters = serde_json::from_value(train["counters"].clone()).map_err(|e| bad("counters", e))?;
        t.replay = serde_json::from_value(train["replay"].clone()).map_err(|e| bad("replay", e))?;
        if let Opt::Adam(a) = &mut t.opt {
            if let Some(saved) = ckpt.to_adam()? {
                *a = saved;
            }
        }
        Ok(t)
    }

    /// Raises the step budget, e.g. to continue a finished run.
    pub fn extend_budget(&mut self, env_steps: u64) {
        self.config.env_steps = env_steps;
    }
}
