//! Deterministic string-state environments.
//!
//! Every domain exposes the same contract: states and actions are plain
//! strings, `expand` lists every legal axiom application together with the
//! resulting state, and `is_solved` is the binary reward. Nothing is cached
//! between calls, so all environments are `Send + Sync` and can be shared
//! freely across threads.

pub mod equations;
pub mod fractions;
pub mod multiplication;
pub mod rubiks;
pub mod sorting;
pub mod ternary;
pub mod trace;

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use trace::{format_trace, parse_trace, validate_trace, TraceStep};

/// Problems used for held-out evaluation.
pub const TEST_SEEDS: Range<u64> = 0..200;

/// Training problems are drawn from this seed range, disjoint from [`TEST_SEEDS`].
pub const TRAIN_SEEDS: Range<u64> = 1_000_000..10_000_000;

/// Upper bound on solution length used throughout search and evaluation.
pub const MAX_DEPTH: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("{env}: cannot parse {text:?} at byte {pos}: {msg}")]
    Parse {
        env: &'static str,
        text: String,
        pos: usize,
        msg: String,
    },
    #[error("axiom {axiom} is not applicable: {reason}")]
    InapplicableAxiom { axiom: String, reason: String },
    #[error("invalid trace at step {step}: {reason}")]
    InvalidTrace { step: usize, reason: String },
    #[error("unknown environment {0:?}")]
    UnknownEnvironment(String),
    #[error("template set is empty")]
    EmptyTemplateSet,
    #[error("bad template {template:?}: {reason}")]
    BadTemplate { template: String, reason: String },
}

impl EnvError {
    pub(crate) fn parse(env: &'static str, text: &str, pos: usize, msg: impl Into<String>) -> Self {
        EnvError::Parse {
            env,
            text: text.to_string(),
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn inapplicable(axiom: impl Into<String>, reason: impl Into<String>) -> Self {
        EnvError::InapplicableAxiom {
            axiom: axiom.into(),
            reason: reason.into(),
        }
    }
}

/// One outgoing edge of a state: the axiom application and where it leads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionEdge {
    pub label: String,
    pub next_state: String,
}

impl ActionEdge {
    pub fn new(label: impl Into<String>, next_state: impl Into<String>) -> Self {
        ActionEdge {
            label: label.into(),
            next_state: next_state.into(),
        }
    }
}

pub trait Environment: Send + Sync {
    fn name(&self) -> &'static str;

    /// Deterministic problem generator: the same seed always yields the same state.
    fn generate(&self, seed: u64) -> String;

    /// Every legal action at `state`, in a fixed order. Empty for solved states.
    fn expand(&self, state: &str) -> Result<Vec<ActionEdge>, EnvError>;

    fn is_solved(&self, state: &str) -> Result<bool, EnvError>;

    /// Parses and re-prints `state`. Canonical states are returned unchanged.
    fn canonicalize(&self, state: &str) -> Result<String, EnvError>;
}

/// Names accepted by [`make_env`].
pub const ENV_NAMES: [&str; 6] = [
    "equations",
    "fractions",
    "ternary-addition",
    "sorting",
    "multiplication",
    "rubiks-cube",
];

/// Also accepts `rubiks-cube:N` for scrambles of at most `N` moves.
pub fn make_env(name: &str) -> Result<Arc<dyn Environment>, EnvError> {
    if let Some(n) = name
        .strip_prefix("rubiks-cube:")
        .or_else(|| name.strip_prefix("rubiks:"))
    {
        let max_scramble = n
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| EnvError::UnknownEnvironment(name.to_string()))?;
        return Ok(Arc::new(rubiks::RubiksCube { max_scramble }));
    }
    let env: Arc<dyn Environment> = match name {
        "equations" => Arc::new(equations::Equations::default()),
        "fractions" => Arc::new(fractions::Fractions),
        "ternary-addition" | "ternary" => Arc::new(ternary::TernaryAddition),
        "sorting" => Arc::new(sorting::Sorting),
        "multiplication" => Arc::new(multiplication::Multiplication),
        "rubiks-cube" | "rubiks" => Arc::new(rubiks::RubiksCube::default()),
        other => return Err(EnvError::UnknownEnvironment(other.to_string())),
    };
    Ok(env)
}

/// The generator PRNG: ChaCha8 keyed by the 64-bit seed.
///
/// ChaCha8's output stream is platform independent, so problems
/// reproduce bit-for-bit on every platform.
pub fn problem_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream from a master seed and a counter.
///
/// Used by learners so that episode `i` always sees the same randomness,
/// regardless of what happened before it (which makes resuming exact).
pub fn derived_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos((index as u128) << 4);
    let mut key = [0u8; 32];
    rng.fill(&mut key);
    ChaCha8Rng::from_seed(key)
}

pub fn sample_train_seed<R: Rng>(rng: &mut R) -> u64 {
    rng.random_range(TRAIN_SEEDS)
}
