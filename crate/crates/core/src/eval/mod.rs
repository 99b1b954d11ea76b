//! Environment statistics, held-out success rates and representation
//! analysis.

mod repr;

pub use repr::{
    cosine_similarity, edit_distance_knn, embedding_knn, knn_accuracy, levenshtein, load_labeled_csv,
    pca_project, shuffled_label_chance, synthetic_equation_set, LabeledSet, Pca,
};

use std::ops::Range;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{derived_rng, sample_train_seed, Environment, MAX_DEPTH};
use crate::par::par_map;
use crate::search::{bfs, greedy_rollout, Policy};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("degenerate set: {0}")]
    DegenerateSet(String),
    #[error("{0}")]
    Io(String),
}

/// How states are drawn for the branching-factor average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingLaw {
    /// Every non-terminal state along uniform random walks of up to 30 steps.
    #[default]
    Walk,
    /// Freshly generated problems only.
    Start,
    /// The endpoint of a random walk whose length is uniform in 0..=30,
    /// skipped when terminal.
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsConfig {
    pub states: u64,
    pub problems: u64,
    pub edge_budget: u64,
    pub seed: u64,
    pub law: SamplingLaw,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            states: 100_000,
            problems: 1000,
            edge_budget: 10_000_000,
            seed: 0,
            law: SamplingLaw::Walk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainStats {
    pub env: String,
    pub avg_branching_factor: f64,
    pub states_sampled: u64,
    pub bfs_success_rate: f64,
    pub bfs_solved: u64,
    pub problems: u64,
    pub edge_budget: u64,
    pub law: SamplingLaw,
    pub seed: u64,
}

const STREAM_WALKS: u64 = 11;

/// Branching factors of sampled non-terminal states, in sampling order.
pub fn sample_branching(env: &dyn Environment, n_states: u64, seed: u64, law: SamplingLaw) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_states as usize);
    let mut walk = 0u64;
    let mut dry = 0u64;
    while (out.len() as u64) < n_states {
        let before = out.len();
        let mut rng = derived_rng(seed, STREAM_WALKS, walk);
        walk += 1;
        let mut state = env.generate(sample_train_seed(&mut rng));
        let steps = match law {
            SamplingLaw::Walk => MAX_DEPTH,
            SamplingLaw::Start => 0,
            SamplingLaw::Endpoint => rng.random_range(0..=MAX_DEPTH),
        };
        for i in 0..=steps {
            let Ok(edges) = env.expand(&state) else { break };
            if edges.is_empty() {
                break;
            }
            if law == SamplingLaw::Walk || i == steps {
                out.push(edges.len());
                if out.len() as u64 >= n_states {
                    break;
                }
            }
            if i == steps {
                break;
            }
            state = edges.choose(&mut rng).expect("non-empty").next_state.clone();
        }
        dry = if out.len() == before { dry + 1 } else { 0 };
        if dry > 10_000 {
            log::warn!("{}: stopped sampling, no non-terminal states found", env.name());
            break;
        }
    }
    out
}

/// Fraction of `seeds` that budgeted BFS solves, plus the solved count.
pub fn bfs_success(env: &dyn Environment, seeds: Range<u64>, edge_budget: u64) -> (f64, u64) {
    let seeds: Vec<u64> = seeds.collect();
    let solved = par_map(&seeds, |&s| bfs(env, &env.generate(s), edge_budget).solved() as u64)
        .into_iter()
        .sum::<u64>();
    (solved as f64 / seeds.len().max(1) as f64, solved)
}

/// Branching factor over sampled states and BFS success over test seeds
/// `0..problems`.
pub fn compute_stats(env: &dyn Environment, config: &StatsConfig) -> DomainStats {
    let bf = sample_branching(env, config.states, config.seed, config.law);
    let avg = bf.iter().sum::<usize>() as f64 / bf.len().max(1) as f64;
    let (rate, solved) = bfs_success(env, 0..config.problems, config.edge_budget);
    DomainStats {
        env: env.name().to_string(),
        avg_branching_factor: avg,
        states_sampled: bf.len() as u64,
        bfs_success_rate: rate,
        bfs_solved: solved,
        problems: config.problems,
        edge_budget: config.edge_budget,
        law: config.law,
        seed: config.seed,
    }
}

/// Fraction of `seeds` whose greedy rollout reaches a solution within 30 steps.
pub fn success_rate(env: &dyn Environment, policy: &dyn Policy, seeds: Range<u64>) -> f64 {
    let seeds: Vec<u64> = seeds.collect();
    if seeds.is_empty() {
        return 0.0;
    }
    let solved: usize = par_map(&seeds, |&s| {
        greedy_rollout(env, policy, &env.generate(s), MAX_DEPTH).solved() as usize
    })
    .into_iter()
    .sum();
    solved as f64 / seeds.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::rubiks::RubiksCube;
    use crate::env::sorting::{SortList, Sorting};
    use crate::search::{ScoreFnPolicy, UniformPolicy};

    #[test]
    fn rubiks_branching_is_twelve() {
        let bf = sample_branching(&RubiksCube::default(), 500, 0, SamplingLaw::Walk);
        assert_eq!(bf.len(), 500);
        assert!(bf.iter().all(|&b| b == 12));
    }

    #[test]
    fn stats_are_reproducible() {
        let c = StatsConfig {
            states: 2000,
            problems: 5,
            edge_budget: 5_000,
            seed: 9,
            law: SamplingLaw::Walk,
        };
        let a = compute_stats(&Sorting, &c);
        assert_eq!(a, compute_stats(&Sorting, &c));
        assert_eq!(a.states_sampled, 2000);
        for law in [SamplingLaw::Start, SamplingLaw::Endpoint] {
            let n = sample_branching(&Sorting, 300, 1, law).len();
            assert_eq!(n, 300);
        }
    }

    #[test]
    fn oracle_policy_sorts_everything() {
        let p = ScoreFnPolicy(|_: &str, c: &str| -(SortList::parse(c).unwrap().inversions() as f64));
        assert_eq!(success_rate(&Sorting, &p, 0..200), 1.0);
        let u = success_rate(&Sorting, &UniformPolicy, 0..200);
        assert!(u > 0.0 && u < 1.0);
    }
}
