//! Search over environment graphs: budgeted BFS, policy-guided beam search,
//! greedy rollouts and batch weighted A*.

mod beam;
mod bfs;
mod bwas;
mod greedy;

pub use beam::beam_search;
pub use bfs::bfs;
pub use bwas::{bwas, BwasConfig, Heuristic};
pub use greedy::greedy_rollout;

use serde::{Deserialize, Serialize};

use crate::env::{format_trace, TraceStep, MAX_DEPTH};

/// Scores candidate successors of a state.
///
/// Implementations return one log-probability per candidate. Batching lets
/// neural scorers encode every state of a search frontier at once.
pub trait Policy: Send + Sync {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>>;

    fn log_probs(&self, state: &str, candidates: &[String]) -> Vec<f64> {
        self.log_probs_batch(&[(state, candidates)])
            .pop()
            .unwrap_or_default()
    }
}

impl<P: Policy + ?Sized> Policy for &P {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        (**self).log_probs_batch(queries)
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        (**self).log_probs_batch(queries)
    }
}

impl<P: Policy + ?Sized> Policy for std::sync::Arc<P> {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        (**self).log_probs_batch(queries)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPolicy;

impl Policy for UniformPolicy {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        queries
            .iter()
            .map(|(_, c)| vec![-(c.len() as f64).ln(); c.len()])
            .collect()
    }
}

/// Softmax over a hand-written score of (state, candidate).
pub struct ScoreFnPolicy<F>(pub F);

impl<F: Fn(&str, &str) -> f64 + Send + Sync> Policy for ScoreFnPolicy<F> {
    fn log_probs_batch(&self, queries: &[(&str, &[String])]) -> Vec<Vec<f64>> {
        queries
            .iter()
            .map(|(s, cands)| {
                let logits: Vec<f64> = cands.iter().map(|c| (self.0)(s, c)).collect();
                log_softmax(&logits)
            })
            .collect()
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    if logits.is_empty() {
        return Vec::new();
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

/// A state reached during search and the state it was expanded from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub state: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Starts at the initial state; empty of actions if it was already solved.
    pub solution: Option<Vec<TraceStep>>,
    /// `visited_per_step[i]` holds every successor generated at depth `i + 1`.
    pub visited_per_step: Vec<Vec<Candidate>>,
    pub edges_expanded: u64,
    pub nodes_generated: u64,
}

impl SearchOutcome {
    pub fn solved(&self) -> bool {
        self.solution.is_some()
    }

    /// Number of actions in the solution.
    pub fn solution_len(&self) -> Option<usize> {
        self.solution.as_ref().map(|s| s.len() - 1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "solved": self.solved(),
            "length": self.solution_len(),
            "trace": self.solution.as_ref().map(|s| format_trace(s)),
            "candidates_per_step": self.visited_per_step.iter().map(Vec::len).collect::<Vec<_>>(),
            "edges_expanded": self.edges_expanded,
            "nodes_generated": self.nodes_generated,
        })
    }
}

/// Search depth grows by one every `interval` solved problems, up to 30.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeepeningSchedule {
    pub initial_depth: usize,
    pub interval: usize,
    pub max_depth: usize,
}

impl Default for DeepeningSchedule {
    fn default() -> Self {
        DeepeningSchedule {
            initial_depth: 3,
            interval: 100,
            max_depth: MAX_DEPTH,
        }
    }
}

impl DeepeningSchedule {
    pub fn depth(&self, solved: u64) -> usize {
        let grown = self.initial_depth as u64 + solved / self.interval.max(1) as u64;
        grown.min(self.max_depth as u64) as usize
    }
}

/// Rebuilds a root-to-leaf trace from `(state, label, parent)` records.
pub(crate) fn trace_back(nodes: &[(String, Option<String>, usize)], mut i: usize) -> Vec<TraceStep> {
    let mut rev = Vec::new();
    loop {
        let (s, a, p) = &nodes[i];
        rev.push(TraceStep {
            state: s.clone(),
            action: a.clone(),
        });
        if a.is_none() {
            break;
        }
        i = *p;
    }
    rev.reverse();
    rev
}
