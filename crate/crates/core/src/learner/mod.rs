//! Training loops for the contrastive policy learner, its local-negative
//! ablation, contrastive value iteration and behavioural cloning.

mod buffer;
mod examples;
mod trainer;

pub use buffer::ReplayBuffer;
pub use examples::{extract_examples, value_targets, NegativeMode};
pub use trainer::{Counters, Trainer};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ActionEdge, EnvError, Environment};
use crate::nn::{NnError, OptimizerKind, ScorerConfig};
use crate::search::DeepeningSchedule;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("search outcome has no solution")]
    NoSolution,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    #[default]
    Conpole,
    ConpoleLocal,
    Cvi,
    Bc,
}

impl LearnerKind {
    pub fn negative_mode(self) -> NegativeMode {
        match self {
            LearnerKind::ConpoleLocal => NegativeMode::Local,
            _ => NegativeMode::All,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learner: LearnerKind,
    pub seed: u64,
    /// Budget in environment steps (expand calls).
    pub env_steps: u64,
    pub max_episodes: Option<u64>,
    pub beam_size: usize,
    pub deepening: DeepeningSchedule,
    /// Optimise after this many solved problems.
    pub update_interval: u64,
    pub steps_per_update: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub grad_clip: Option<f64>,
    pub buffer_capacity: usize,
    pub negative_cap: usize,
    /// Evaluate (and checkpoint) every this many environment steps.
    pub eval_interval: u64,
    /// Number of test seeds, counted from 0.
    pub eval_problems: u64,
    pub scorer: ScorerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learner: LearnerKind::Conpole,
            seed: 0,
            env_steps: 10_000_000,
            max_episodes: None,
            beam_size: 10,
            deepening: DeepeningSchedule::default(),
            update_interval: 10,
            steps_per_update: 256,
            minibatch: 16,
            learning_rate: 5e-6,
            optimizer: OptimizerKind::Adam,
            grad_clip: None,
            buffer_capacity: 100_000,
            negative_cap: 512,
            eval_interval: 100_000,
            eval_problems: 200,
            scorer: ScorerConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let positive = [
            ("beam_size", self.beam_size as u64),
            ("update_interval", self.update_interval),
            ("steps_per_update", self.steps_per_update as u64),
            ("minibatch", self.minibatch as u64),
            ("buffer_capacity", self.buffer_capacity as u64),
            ("negative_cap", self.negative_cap as u64),
            ("eval_interval", self.eval_interval),
            ("deepening.interval", self.deepening.interval as u64),
            ("scorer.embed_dim", self.scorer.embed_dim as u64),
            ("scorer.hidden_dim", self.scorer.hidden_dim as u64),
            ("scorer.layers", self.scorer.layers as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(LearnError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(LearnError::InvalidConfig("learning_rate must be finite and non-negative".into()));
        }
        if self.deepening.initial_depth > self.deepening.max_depth {
            return Err(LearnError::InvalidConfig("deepening.initial_depth exceeds max_depth".into()));
        }
        Ok(())
    }
}

/// One line of the metrics log, written at every evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub episodes: u64,
    pub solved: u64,
    pub success_rate: f64,
    /// Mean training loss since the previous record; `None` if no update ran.
    pub loss: Option<f64>,
    pub depth: usize,
    /// Replay insertions so far.
    pub examples: u64,
}

/// Counts `expand` calls made through it.
pub struct CountingEnv<'a> {
    inner: &'a dyn Environment,
    calls: AtomicU64,
}

impl<'a> CountingEnv<'a> {
    pub fn new(inner: &'a dyn Environment) -> Self {
        CountingEnv {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Environment for CountingEnv<'_> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn generate(&self, seed: u64) -> String {
        self.inner.generate(seed)
    }

    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.expand(state)
    }

    fn is_solved(&self, state: &str) -> Result<bool, EnvError> {
        self.inner.is_solved(state)
    }

    fn canonicalize(&self, state: &str) -> Result<String, EnvError> {
        self.inner.canonicalize(state)
    }
}
